#include "robustgen/linalg.hpp"

#include <cmath>
#include <string>

#include "robustgen/errors.hpp"
#include "robustgen/rng.hpp"

namespace robustgen::nn {

double frobenius_norm_sq(const Tensor& t) {
    double s = 0.0;
    for (double v : t.data) s += v * v;
    return s;
}

double frobenius_dist_sq(const Tensor& a, const Tensor& b) {
    if (a.shape != b.shape) throw DimensionError("frobenius distance of mismatched tensors");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return s;
}

namespace {

// The linear part of a layer as an operator pair (apply, apply^T).
struct LayerMap {
    const Layer* layer;
    std::size_t h, w;

    std::size_t in_dim() const {
        const auto& s = layer->spec;
        return s.kind == LayerKind::dense ? s.fan_in : s.fan_in * h * w;
    }
    std::size_t out_dim() const {
        const auto& s = layer->spec;
        return s.kind == LayerKind::dense ? s.fan_out : s.fan_out * h * w;
    }

    void apply(const double* x, double* y) const {
        const auto& s = layer->spec;
        const double* W = layer->weights.data.data();
        if (s.kind == LayerKind::dense) {
            for (std::size_t j = 0; j < s.fan_out; ++j) {
                const double* row = W + j * s.fan_in;
                double acc = 0.0;
                for (std::size_t k = 0; k < s.fan_in; ++k) acc += row[k] * x[k];
                y[j] = acc;
            }
            return;
        }
        const std::size_t k = s.kernel_size, pad = (k - 1) / 2;
        for (std::size_t o = 0; o < s.fan_out; ++o)
            for (std::size_t yy = 0; yy < h; ++yy)
                for (std::size_t xx = 0; xx < w; ++xx) {
                    double acc = 0.0;
                    for (std::size_t c = 0; c < s.fan_in; ++c) {
                        const double* Wk = W + (o * s.fan_in + c) * k * k;
                        const double* plane = x + c * h * w;
                        for (std::size_t ky = 0; ky < k; ++ky) {
                            const long sy = static_cast<long>(yy + ky) - static_cast<long>(pad);
                            if (sy < 0 || sy >= static_cast<long>(h)) continue;
                            for (std::size_t kx = 0; kx < k; ++kx) {
                                const long sx =
                                    static_cast<long>(xx + kx) - static_cast<long>(pad);
                                if (sx < 0 || sx >= static_cast<long>(w)) continue;
                                acc += Wk[ky * k + kx] * plane[sy * w + sx];
                            }
                        }
                    }
                    y[(o * h + yy) * w + xx] = acc;
                }
    }

    void apply_transpose(const double* g, double* x) const {
        const auto& s = layer->spec;
        const double* W = layer->weights.data.data();
        if (s.kind == LayerKind::dense) {
            for (std::size_t kk = 0; kk < s.fan_in; ++kk) x[kk] = 0.0;
            for (std::size_t j = 0; j < s.fan_out; ++j) {
                const double* row = W + j * s.fan_in;
                const double gj = g[j];
                for (std::size_t kk = 0; kk < s.fan_in; ++kk) x[kk] += row[kk] * gj;
            }
            return;
        }
        const std::size_t k = s.kernel_size, pad = (k - 1) / 2;
        for (std::size_t i = 0; i < in_dim(); ++i) x[i] = 0.0;
        // Transpose of zero-padded stride-1 convolution: scatter each output
        // gradient back through the kernel window it read from.
        for (std::size_t o = 0; o < s.fan_out; ++o)
            for (std::size_t yy = 0; yy < h; ++yy)
                for (std::size_t xx = 0; xx < w; ++xx) {
                    const double gv = g[(o * h + yy) * w + xx];
                    if (gv == 0.0) continue;
                    for (std::size_t c = 0; c < s.fan_in; ++c) {
                        const double* Wk = W + (o * s.fan_in + c) * k * k;
                        double* plane = x + c * h * w;
                        for (std::size_t ky = 0; ky < k; ++ky) {
                            const long sy = static_cast<long>(yy + ky) - static_cast<long>(pad);
                            if (sy < 0 || sy >= static_cast<long>(h)) continue;
                            for (std::size_t kx = 0; kx < k; ++kx) {
                                const long sx =
                                    static_cast<long>(xx + kx) - static_cast<long>(pad);
                                if (sx < 0 || sx >= static_cast<long>(w)) continue;
                                plane[sy * w + sx] += Wk[ky * k + kx] * gv;
                            }
                        }
                    }
                }
    }
};

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

double spectral_norm(const Layer& layer, std::size_t input_height, std::size_t input_width,
                     const SpectralOptions& opts) {
    LayerMap map{&layer, input_height, input_width};
    const std::size_t n = map.in_dim(), m = map.out_dim();

    std::vector<double> v(n), mv(m), back(n);
    Rng rng(opts.start_seed);
    for (double& x : v) x = rng.normal();
    const double vn = norm2(v);
    for (double& x : v) x /= vn;

    double est = 0.0;
    for (int it = 0; it < opts.max_iterations; ++it) {
        map.apply(v.data(), mv.data());
        const double sigma = norm2(mv);  // ||M v|| with ||v|| == 1
        if (sigma == 0.0) return 0.0;    // v landed in the null space of a zero map
        map.apply_transpose(mv.data(), back.data());
        const double bn = norm2(back);
        if (bn == 0.0) return sigma;
        for (std::size_t i = 0; i < n; ++i) v[i] = back[i] / bn;

        const double change = std::abs(sigma - est);
        est = sigma;
        if (it > 0 && change <= opts.internal_tol * est) return est;
    }
    // The estimate may still meet the contractual tolerance even when the
    // tight internal stop was never reached (clustered singular values).
    map.apply(v.data(), mv.data());
    const double sigma = norm2(mv);
    if (std::abs(sigma - est) <= opts.tol * sigma) return sigma;
    throw ConvergenceError("power iteration did not settle after " +
                               std::to_string(opts.max_iterations) + " iterations",
                           sigma);
}

Tensor materialize_linear_map(const Layer& layer, std::size_t input_height,
                              std::size_t input_width, std::size_t cap) {
    LayerMap map{&layer, input_height, input_width};
    const std::size_t n = map.in_dim(), m = map.out_dim();
    if (n > cap || m > cap)
        throw SizeError("linear map " + std::to_string(m) + "x" + std::to_string(n) +
                        " exceeds materialization cap " + std::to_string(cap));
    Tensor M({m, n});
    std::vector<double> e(n, 0.0), col(m);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        map.apply(e.data(), col.data());
        e[j] = 0.0;
        for (std::size_t i = 0; i < m; ++i) M.data[i * n + j] = col[i];
    }
    return M;
}

}  // namespace robustgen::nn
