#include "vfcert/image.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vfcert {

using nlohmann::json;

Image::Image(int width, int channels)
    : width_(width), channels_(channels),
      data_(static_cast<std::size_t>(width) * width * channels, 0.0) {
    if (width < 1 || channels < 1)
        throw ArgumentError("image dimensions must be positive");
}

Image::Image(int width, int channels, std::vector<double> data)
    : width_(width), channels_(channels), data_(std::move(data)) {
    if (width < 1 || channels < 1)
        throw ArgumentError("image dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(width) * width * channels)
        throw ArgumentError("image data size does not match width/channels");
    for (double v : data_)
        if (!std::isfinite(v))
            throw ArgumentError("image values must be finite");
}

static void check_region(const Image& image, int m, int n) {
    if (m < 1 || n < 1 || m > image.width() - 1 || n > image.width() - 1)
        throw ArgumentError("interpolation region out of range");
}

RegionCoeffs region_coeffs(const Image& image, int m, int n) {
    check_region(image, m, n);
    const int C = image.channels();
    RegionCoeffs rc;
    rc.m = m;
    rc.n = n;
    rc.A.resize(C);
    rc.B.resize(C);
    rc.C.resize(C);
    rc.D.resize(C);
    rc.a0.resize(C);
    rc.av.resize(C);
    rc.aw.resize(C);
    rc.avw.resize(C);
    rc.c00.resize(C);
    rc.c10.resize(C);
    rc.c01.resize(C);
    rc.c11.resize(C);
    for (int c = 0; c < C; ++c) {
        const double i00 = image.at(m, n, c);
        const double i10 = image.at(m + 1, n, c);
        const double i01 = image.at(m, n + 1, c);
        const double i11 = image.at(m + 1, n + 1, c);
        rc.c00[c] = i00;
        rc.c10[c] = i10;
        rc.c01[c] = i01;
        rc.c11[c] = i11;
        // corner-anchored form
        rc.a0[c] = i00;
        rc.av[c] = i10 - i00;
        rc.aw[c] = i01 - i00;
        rc.avw[c] = i00 - i10 - i01 + i11;
        // grouped global expansion of the four corner terms
        rc.A[c] = i00 * (1 + m) * (1 + n) - i10 * m * (1 + n) - i01 * (1 + m) * n + i11 * m * n;
        rc.B[c] = -i00 * (1 + n) + i10 * (1 + n) + i01 * n - i11 * n;
        rc.C[c] = -i00 * (1 + m) + i10 * m + i01 * (1 + m) - i11 * m;
        rc.D[c] = rc.avw[c];
    }
    return rc;
}

RegionCoeffs bilinear_coeffs(const Image& image, int channel, int m, int n) {
    if (channel < 0 || channel >= image.channels())
        throw ArgumentError("channel out of range");
    check_region(image, m, n);
    RegionCoeffs all = region_coeffs(image, m, n);
    RegionCoeffs one;
    one.m = m;
    one.n = n;
    one.A = {all.A[channel]};
    one.B = {all.B[channel]};
    one.C = {all.C[channel]};
    one.D = {all.D[channel]};
    one.a0 = {all.a0[channel]};
    one.av = {all.av[channel]};
    one.aw = {all.aw[channel]};
    one.avw = {all.avw[channel]};
    return one;
}

std::pair<int, int> containing_region(double x, double y, int width) {
    int m = static_cast<int>(std::floor(x));
    int n = static_cast<int>(std::floor(y));
    m = std::max(1, std::min(m, width - 1));
    n = std::max(1, std::min(n, width - 1));
    return {m, n};
}

void interpolate_into(const Image& image, double x, double y, double* out) {
    const int W = image.width();
    if (W < 2)
        throw DomainError("interpolation needs at least a 2x2 image");
    if (!(x >= 1.0 && x <= W && y >= 1.0 && y <= W)) {
        std::ostringstream oss;
        oss << "coordinate (" << x << ", " << y << ") outside image [1, " << W << "]^2";
        throw DomainError(oss.str());
    }
    auto [m, n] = containing_region(x, y, W);
    const double u = x - m;
    const double t = y - n;
    const int C = image.channels();
    for (int c = 0; c < C; ++c) {
        const double i00 = image.at(m, n, c);
        const double i10 = image.at(m + 1, n, c);
        const double i01 = image.at(m, n + 1, c);
        const double i11 = image.at(m + 1, n + 1, c);
        // Product form matches RegionCoeffs::eval bit for bit.
        out[c] = (i00 * (1.0 - t) + i01 * t) * (1.0 - u) + (i10 * (1.0 - t) + i11 * t) * u;
    }
}

std::vector<double> interpolate(const Image& image, double x, double y) {
    std::vector<double> out(image.channels());
    interpolate_into(image, x, y, out.data());
    return out;
}

Image deform(const Image& image, const VectorField& field) {
    const int W = image.width();
    if (field.width != W)
        throw ArgumentError("vector field size does not match image");
    Image out(W, image.channels());
    const int C = image.channels();
    std::vector<double> buf(C);
    for (int i = 1; i <= W; ++i) {
        for (int j = 1; j <= W; ++j) {
            interpolate_into(image, i + field.dx_at(i, j), j + field.dy_at(i, j), buf.data());
            for (int c = 0; c < C; ++c)
                out.at(i, j, c) = buf[c];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// IDX3

static uint32_t read_be32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in)
        throw FormatError("idx: truncated header");
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) | uint32_t(b[3]);
}

static void write_be32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(b), 4);
}

std::vector<Image> load_idx(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("idx: cannot open " + path);
    const uint32_t magic = read_be32(in);
    if (magic != 0x00000803u)
        throw FormatError("idx: bad magic (expected 0x00000803)");
    const uint32_t count = read_be32(in);
    const uint32_t rows = read_be32(in);
    const uint32_t cols = read_be32(in);
    if (rows != cols)
        throw FormatError("idx: only square images are supported");
    const int W = static_cast<int>(rows);
    std::vector<Image> images;
    images.reserve(count);
    std::vector<unsigned char> raw(static_cast<std::size_t>(W) * W);
    for (uint32_t k = 0; k < count; ++k) {
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (!in)
            throw FormatError("idx: truncated pixel data");
        Image img(W, 1);
        for (std::size_t p = 0; p < raw.size(); ++p)
            img.data()[p] = raw[p] / 255.0;
        images.push_back(std::move(img));
    }
    return images;
}

void save_idx(const std::vector<Image>& images, const std::string& path) {
    if (images.empty())
        throw ArgumentError("idx: nothing to write");
    const int W = images[0].width();
    for (const Image& img : images)
        if (img.width() != W || img.channels() != 1)
            throw ArgumentError("idx: all images must be single-channel with equal size");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FormatError("idx: cannot open " + path + " for writing");
    write_be32(out, 0x00000803u);
    write_be32(out, static_cast<uint32_t>(images.size()));
    write_be32(out, static_cast<uint32_t>(W));
    write_be32(out, static_cast<uint32_t>(W));
    for (const Image& img : images) {
        for (double v : img.data()) {
            const double scaled = std::round(std::min(1.0, std::max(0.0, v)) * 255.0);
            const unsigned char b = static_cast<unsigned char>(scaled);
            out.write(reinterpret_cast<const char*>(&b), 1);
        }
    }
}

// ---------------------------------------------------------------------------
// Tensor JSON

Image image_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("tensor json: parse error: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("width") || !doc.contains("channels") || !doc.contains("data"))
        throw FormatError("tensor json: expected object with width/channels/data");
    const int W = doc["width"].get<int>();
    const int C = doc["channels"].get<int>();
    if (W < 1 || C < 1)
        throw FormatError("tensor json: width and channels must be positive");
    const json& data = doc["data"];
    if (!data.is_array() || static_cast<int>(data.size()) != W)
        throw FormatError("tensor json: data must have W rows");
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(W) * W * C);
    for (const json& row : data) {
        if (!row.is_array() || static_cast<int>(row.size()) != W)
            throw FormatError("tensor json: ragged or wrong-length row");
        for (const json& cell : row) {
            if (C == 1 && cell.is_number()) {
                values.push_back(cell.get<double>());
            } else {
                if (!cell.is_array() || static_cast<int>(cell.size()) != C)
                    throw FormatError("tensor json: pixel entry does not match channel count");
                for (const json& v : cell) {
                    if (!v.is_number())
                        throw FormatError("tensor json: non-numeric pixel value");
                    values.push_back(v.get<double>());
                }
            }
        }
    }
    return Image(W, C, std::move(values));
}

std::string image_to_json_text(const Image& image) {
    json rows = json::array();
    const int W = image.width();
    const int C = image.channels();
    for (int i = 1; i <= W; ++i) {
        json row = json::array();
        for (int j = 1; j <= W; ++j) {
            if (C == 1) {
                row.push_back(image.at(i, j, 0));
            } else {
                json cell = json::array();
                for (int c = 0; c < C; ++c)
                    cell.push_back(image.at(i, j, c));
                row.push_back(std::move(cell));
            }
        }
        rows.push_back(std::move(row));
    }
    json doc = {{"width", W}, {"channels", C}, {"data", std::move(rows)}};
    return doc.dump();
}

Image load_tensor_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError("tensor json: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return image_from_json_text(buf.str());
}

void save_tensor_json(const Image& image, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw FormatError("tensor json: cannot open " + path + " for writing");
    out << image_to_json_text(image) << "\n";
}

} // namespace vfcert
