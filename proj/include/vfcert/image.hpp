#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vfcert/errors.hpp"

namespace vfcert {

// A W x W image with C channels, pixel values stored as doubles.
// Grid coordinates are 1-based: pixel (i, j) with i, j in {1, ..., W}.
// Storage is row-major over (i, j, c) with the channel index minor.
class Image {
public:
    Image(int width, int channels);
    Image(int width, int channels, std::vector<double> data);

    int width() const { return width_; }
    int channels() const { return channels_; }
    std::size_t size() const { return data_.size(); }

    std::size_t index(int i, int j, int c) const {
        return (static_cast<std::size_t>(i - 1) * width_ + (j - 1)) * channels_ + c;
    }
    double at(int i, int j, int c = 0) const { return data_[index(i, j, c)]; }
    double& at(int i, int j, int c = 0) { return data_[index(i, j, c)]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool in_grid(int i, int j) const {
        return i >= 1 && i <= width_ && j >= 1 && j <= width_;
    }

private:
    int width_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

// Bilinear interpolation on region A_mn = [m, m+1] x [n, n+1] written as
// A + B*v + C*w + D*v*w per channel (global-coordinate form).  Evaluation
// goes through an equivalent corner-anchored form that stays accurate for
// large m, n.
struct RegionCoeffs {
    int m = 0;
    int n = 0;
    std::vector<double> A, B, C, D;      // per channel, global form
    std::vector<double> a0, av, aw, avw; // corner-anchored differences (analysis form)
    std::vector<double> c00, c10, c01, c11; // corner values

    int channels() const { return static_cast<int>(A.size()); }

    // Product-form evaluation: exact at the region corners and bit-exact
    // across shared edges, so adjacent regions agree on their boundary.
    double eval(int channel, double v, double w) const {
        const double u = v - m;
        const double t = w - n;
        return (c00[channel] * (1.0 - t) + c01[channel] * t) * (1.0 - u) +
               (c10[channel] * (1.0 - t) + c11[channel] * t) * u;
    }

    // Coefficients of the same polynomial re-centered at (ci, cj):
    // value = local_const + bx*(v-ci) + cy*(w-cj) + d*(v-ci)*(w-cj).
    void centered(int channel, double ci, double cj, double& bx, double& cy, double& d) const {
        const double p0 = ci - m;
        const double q0 = cj - n;
        d = avw[channel];
        bx = av[channel] + d * q0;
        cy = aw[channel] + d * p0;
    }
};

// Per-pixel displacement field tau(i, j), stored row-major over (i, j).
struct VectorField {
    int width = 0;
    std::vector<double> dx, dy;

    VectorField() = default;
    explicit VectorField(int w) : width(w), dx(static_cast<std::size_t>(w) * w, 0.0),
                                  dy(static_cast<std::size_t>(w) * w, 0.0) {}

    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i - 1) * width + (j - 1);
    }
    double& dx_at(int i, int j) { return dx[index(i, j)]; }
    double& dy_at(int i, int j) { return dy[index(i, j)]; }
    double dx_at(int i, int j) const { return dx[index(i, j)]; }
    double dy_at(int i, int j) const { return dy[index(i, j)]; }
};

// Coefficients of bilinear interpolation on A_mn for one channel.
RegionCoeffs bilinear_coeffs(const Image& image, int channel, int m, int n);
// All channels at once.
RegionCoeffs region_coeffs(const Image& image, int m, int n);

// The interpolation region containing (x, y): floor with clamp to W-1.
// Continuity across region edges makes the boundary choice value-neutral.
std::pair<int, int> containing_region(double x, double y, int width);

// Bilinear interpolation at (x, y), per channel.  Throws DomainError for
// coordinates outside [1, W]^2.
std::vector<double> interpolate(const Image& image, double x, double y);
void interpolate_into(const Image& image, double x, double y, double* out);

// Deformed image: output pixel (i,j) = interpolate(image, (i,j) + tau(i,j)).
Image deform(const Image& image, const VectorField& field);

// IDX3 unsigned-byte images (magic 0x00000803, big-endian header), values
// scaled to [0,1] by division by 255.  Only square images are accepted.
std::vector<Image> load_idx(const std::string& path);
// Writes values rounded to bytes (round(v*255), clamped); test/tooling aid.
void save_idx(const std::vector<Image>& images, const std::string& path);

// Tensor JSON: {"width": W, "channels": C, "data": nested row-major array}.
// For C == 1 the leaves are scalars, otherwise length-C arrays.
Image load_tensor_json(const std::string& path);
void save_tensor_json(const Image& image, const std::string& path);
Image image_from_json_text(const std::string& text);
std::string image_to_json_text(const Image& image);

} // namespace vfcert
