#include "vfcert/quartic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

namespace vfcert {

namespace {

using cplx = std::complex<double>;

cplx eval_monic(const double* c, cplx z) {
    // z^4 + c[3] z^3 + c[2] z^2 + c[1] z + c[0]
    cplx r = z + c[3];
    r = r * z + c[2];
    r = r * z + c[1];
    r = r * z + c[0];
    return r;
}

// Magnitude scale of the monic polynomial at z; |p(z)| below a few ulps of
// this is as converged as doubles allow.
double noise_scale(const double* c, double az) {
    double s = 1.0;
    double pw = 1.0;
    double scale = std::abs(c[0]);
    for (int k = 1; k < 4; ++k) {
        pw *= az;
        scale += std::abs(c[k]) * pw;
    }
    s = pw * az; // az^4
    return scale + s;
}

double eval_orig(double J, double K, double L, double M, double N, double v) {
    return J + v * (K + v * (L + v * (M + v * N)));
}

double eval_orig_deriv(double K, double L, double M, double N, double v) {
    return K + v * (2 * L + v * (3 * M + v * 4 * N));
}

// Newton polish on the original coefficients; keeps the best residual seen.
double polish_root(double J, double K, double L, double M, double N, double r) {
    for (int step = 0; step < 20; ++step) {
        const double f = eval_orig(J, K, L, M, N, r);
        const double df = eval_orig_deriv(K, L, M, N, r);
        if (f == 0.0 || df == 0.0 || !std::isfinite(df))
            break;
        const double delta = f / df;
        if (!std::isfinite(delta))
            break;
        const double next = r - delta;
        if (std::abs(eval_orig(J, K, L, M, N, next)) >= std::abs(f))
            break;
        r = next;
    }
    return r;
}

} // namespace

std::vector<double> quartic_real_roots(double J, double K, double L, double M, double N) {
    if (N == 0.0)
        throw ArgumentError("quartic_real_roots: leading coefficient must be nonzero");
    const double c[4] = {J / N, K / N, L / N, M / N};

    // Cauchy root bound for the monic polynomial.
    double bound = 0.0;
    for (double ck : c)
        bound = std::max(bound, std::abs(ck));
    bound += 1.0;

    cplx z[4];
    const cplx base(0.4, 0.9);
    cplx p(1.0, 0.0);
    for (int k = 0; k < 4; ++k) {
        z[k] = bound * p;
        p *= base;
    }

    const int max_iter = 200;
    bool converged = false;
    for (int it = 0; it < max_iter && !converged; ++it) {
        double max_move = 0.0;
        double max_abs = 0.0;
        for (int k = 0; k < 4; ++k) {
            cplx denom(1.0, 0.0);
            for (int j = 0; j < 4; ++j)
                if (j != k)
                    denom *= z[k] - z[j];
            if (std::abs(denom) < 1e-300) {
                z[k] += cplx(1e-8 * bound, 1e-8 * bound);
                max_move = std::max(max_move, 1.0);
                continue;
            }
            const cplx step = eval_monic(c, z[k]) / denom;
            z[k] -= step;
            max_move = std::max(max_move, std::abs(step));
            max_abs = std::max(max_abs, std::abs(z[k]));
        }
        if (max_move <= 1e-14 * (1.0 + max_abs)) {
            converged = true;
            break;
        }
        // Movement can stall at the evaluation noise floor; residuals at
        // a few ulps of the local polynomial scale are as good as exact.
        bool at_floor = true;
        for (int k = 0; k < 4 && at_floor; ++k)
            at_floor = std::abs(eval_monic(c, z[k])) <=
                       64.0 * 2.220446049250313e-16 * noise_scale(c, std::abs(z[k]));
        converged = at_floor;
    }

    std::vector<double> roots;
    auto try_accept = [&](double guess) {
        const double r = polish_root(J, K, L, M, N, guess);
        if (std::abs(eval_orig(J, K, L, M, N, r)) <= 1e-8)
            roots.push_back(r);
        else
            return false;
        return true;
    };

    if (converged) {
        for (int k = 0; k < 4; ++k) {
            if (std::abs(z[k].imag()) > 1e-7 * (1.0 + std::abs(z[k].real())))
                continue;
            if (!try_accept(z[k].real())) {
                std::ostringstream oss;
                oss << "quartic_real_roots: residual above threshold at candidate root "
                    << z[k].real();
                throw SolverError(oss.str());
            }
        }
    } else {
        // Cap hit.  Iterate pairs straddling a real multiple root stall with
        // a small imaginary part; their real parts still polish onto the
        // root.  Every iterate must either polish to a genuine real root or
        // sit on a clearly complex root, otherwise the instance failed.
        for (int k = 0; k < 4; ++k) {
            const double root_scale =
                64.0 * 2.220446049250313e-16 * noise_scale(c, std::abs(z[k]));
            const double near = std::abs(eval_monic(c, z[k]));
            const bool clearly_complex =
                std::abs(z[k].imag()) > 1e-3 * (1.0 + std::abs(z[k].real()));
            if (clearly_complex) {
                // Near a complex root: safe to discard.  Anything else is
                // an unconverged iterate.
                if (near <= std::max(1e-5, 1e6 * root_scale))
                    continue;
            } else if (try_accept(z[k].real())) {
                continue;
            }
            std::ostringstream oss;
            oss << "quartic_real_roots: Durand-Kerner did not converge; best iterates:";
            for (int i = 0; i < 4; ++i)
                oss << " (" << z[i].real() << (z[i].imag() < 0 ? "" : "+") << z[i].imag() << "i)";
            throw SolverError(oss.str());
        }
    }

    std::sort(roots.begin(), roots.end());
    std::vector<double> unique;
    for (double r : roots) {
        if (unique.empty() || std::abs(r - unique.back()) > 1e-7 * (1.0 + std::abs(r)))
            unique.push_back(r);
    }
    return unique;
}

} // namespace vfcert
