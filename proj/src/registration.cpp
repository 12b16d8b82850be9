#include "fetmosaic/registration.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "fetmosaic/parallel.hpp"

namespace fetmosaic {

namespace {

const double kBinomial5[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

inline int reflect101(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}

Image binomial_smooth(const Image& img) {
    const int w = img.width, h = img.height;
    Image tmp(w, h, img.channels), out(w, h, img.channels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -2; k <= 2; ++k)
                acc += kBinomial5[k + 2] * img.at(reflect101(x + k, w), y);
            tmp.at(x, y) = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -2; k <= 2; ++k)
                acc += kBinomial5[k + 2] * tmp.at(x, reflect101(y + k, h));
            out.at(x, y) = acc;
        }
    return out;
}

// Sampling warp from fixed to moving coordinates as a homography at a given
// pyramid scale. Parameters follow the classic Lucas-Kanade layout.
Homography warp_from_params(std::span<const double> p) {
    Homography h;
    h.m = {1.0 + p[0], p[2], p[4],
           p[1], 1.0 + p[3], p[5],
           p[6], p[7], 1.0};
    return h;
}

std::array<double, 8> params_from_warp(const Homography& w) {
    const Homography n = normalize(w);
    return {n.m[0] - 1.0, n.m[3], n.m[1], n.m[4] - 1.0,
            n.m[2], n.m[5], n.m[6], n.m[7]};
}

// Rescale a level-0 warp to pyramid level l: linear block unchanged,
// translation divided by 2^l, perspective row multiplied by 2^l.
Homography warp_to_level(const Homography& w0, int level) {
    const double s = std::pow(2.0, level);
    Homography w = w0;
    w.m[2] /= s;
    w.m[5] /= s;
    w.m[6] *= s;
    w.m[7] *= s;
    return w;
}

Homography warp_to_level0(const Homography& wl, int level) {
    return warp_to_level(wl, -level);
}

struct NormalEquations {
    Eigen::MatrixXd H;
    Eigen::VectorXd g;
    double cost = 0.0; // mean squared residual
    size_t valid = 0;
    size_t masked = 0;
};

NormalEquations accumulate(const Image& fixed, const Image& moving,
                           const FovMask& mask, const FovMask& moving_mask,
                           std::span<const double> p,
                           bool projective, bool with_jacobian) {
    const int n_params = projective ? 8 : 6;
    NormalEquations eq;
    eq.H = Eigen::MatrixXd::Zero(n_params, n_params);
    eq.g = Eigen::VectorXd::Zero(n_params);
    double sum_sq = 0.0;
    std::array<double, 8> jac;
    for (int y = 0; y < fixed.height; ++y)
        for (int x = 0; x < fixed.width; ++x) {
            if (!mask.at(x, y)) continue;
            ++eq.masked;
            double r;
            if (!detail::residual_at(fixed, moving, x, y, p, projective, &r,
                                     with_jacobian ? &jac : nullptr,
                                     &moving_mask))
                continue;
            ++eq.valid;
            sum_sq += r * r;
            if (with_jacobian)
                for (int i = 0; i < n_params; ++i) {
                    eq.g(i) += jac[i] * r;
                    for (int j = i; j < n_params; ++j)
                        eq.H(i, j) += jac[i] * jac[j];
                }
        }
    if (with_jacobian)
        for (int i = 0; i < n_params; ++i)
            for (int j = 0; j < i; ++j) eq.H(i, j) = eq.H(j, i);
    eq.cost = eq.valid ? sum_sq / eq.valid : 0.0;
    return eq;
}

double corner_displacement(const Homography& a, const Homography& b,
                           int w, int h) {
    return max_corner_error(a, b, w, h);
}

} // namespace

namespace detail {

bool residual_at(const Image& fixed, const Image& moving, int x, int y,
                 std::span<const double> p, bool projective,
                 double* r, std::array<double, 8>* jac,
                 const FovMask* moving_mask) {
    const double nu = (1.0 + p[0]) * x + p[2] * y + p[4];
    const double nv = p[1] * x + (1.0 + p[3]) * y + p[5];
    const double w = projective ? (p[6] * x + p[7] * y + 1.0) : 1.0;
    if (std::abs(w) <= 1e-12) return false;
    const double u = nu / w;
    const double v = nv / w;
    if (!(u >= 0.0 && u <= moving.width - 1.0 &&
          v >= 0.0 && v <= moving.height - 1.0))
        return false;
    const int x0 = static_cast<int>(std::floor(u));
    const int y0 = static_cast<int>(std::floor(v));
    const double fx = u - x0;
    const double fy = v - y0;
    const int x1 = std::min(x0 + 1, moving.width - 1);
    const int y1 = std::min(y0 + 1, moving.height - 1);
    if (moving_mask &&
        !(moving_mask->at(x0, y0) && moving_mask->at(x1, y0) &&
          moving_mask->at(x0, y1) && moving_mask->at(x1, y1)))
        return false; // a tap would read zeroed out-of-view content
    const double v00 = moving.at(x0, y0);
    const double v10 = moving.at(x1, y0);
    const double v01 = moving.at(x0, y1);
    const double v11 = moving.at(x1, y1);
    const double top = v00 + fx * (v10 - v00);
    const double bot = v01 + fx * (v11 - v01);
    *r = top + fy * (bot - top) - fixed.at(x, y);

    if (jac) {
        // Exact gradient of the bilinear interpolant at (u, v).
        const double gx = (1.0 - fy) * (v10 - v00) + fy * (v11 - v01);
        const double gy = (1.0 - fx) * (v01 - v00) + fx * (v11 - v10);
        auto& J = *jac;
        J[0] = gx * x / w;
        J[1] = gy * x / w;
        J[2] = gx * y / w;
        J[3] = gy * y / w;
        J[4] = gx / w;
        J[5] = gy / w;
        if (projective) {
            const double drdw = -(gx * u + gy * v) / w;
            J[6] = drdw * x;
            J[7] = drdw * y;
        } else {
            J[6] = J[7] = 0.0;
        }
    }
    return true;
}

} // namespace detail

std::vector<std::pair<Image, FovMask>>
build_pyramid(const Image& img, const FovMask& mask, int levels) {
    if (levels < 1) throw ImageTooSmall("build_pyramid: levels must be >= 1");
    const int min_dim = 1 << (levels - 1);
    if (img.width < min_dim || img.height < min_dim)
        throw ImageTooSmall("build_pyramid: " + std::to_string(img.width) + "x" +
                            std::to_string(img.height) + " too small for " +
                            std::to_string(levels) + " levels");
    if (img.width != mask.width || img.height != mask.height)
        throw DimensionMismatch("build_pyramid: mask shape differs from image");

    std::vector<std::pair<Image, FovMask>> pyr;
    pyr.emplace_back(img, mask);
    for (int l = 1; l < levels; ++l) {
        const Image& prev = pyr.back().first;
        const FovMask& prev_mask = pyr.back().second;
        const Image sm = binomial_smooth(prev);
        const int nw = (prev.width + 1) / 2;
        const int nh = (prev.height + 1) / 2;
        Image next(nw, nh, 1);
        FovMask next_mask(nw, nh, false);
        for (int y = 0; y < nh; ++y)
            for (int x = 0; x < nw; ++x) {
                next.at(x, y) = sm.at(2 * x, 2 * y);
                bool all = true;
                for (int dy = -2; dy <= 2 && all; ++dy)
                    for (int dx = -2; dx <= 2 && all; ++dx) {
                        const int sx = std::clamp(2 * x + dx, 0, prev.width - 1);
                        const int sy = std::clamp(2 * y + dy, 0, prev.height - 1);
                        all = prev_mask.at(sx, sy);
                    }
                next_mask.at(x, y) = all;
            }
        pyr.emplace_back(std::move(next), std::move(next_mask));
    }
    return pyr;
}

RegistrationResult register_pair(const Image& fixed, const Image& moving,
                                 const FovMask& mask,
                                 const RegistrationConfig& cfg,
                                 const Homography& init) {
    if (fixed.width != moving.width || fixed.height != moving.height)
        throw DimensionMismatch("register_pair: frame shapes differ");
    if (fixed.channels != 1 || moving.channels != 1)
        throw DimensionMismatch("register_pair: images must be single-channel");

    const bool projective = cfg.parameterization == Parameterization::projective8;
    const int n_params = projective ? 8 : 6;
    const auto fixed_pyr = build_pyramid(fixed, mask, cfg.pyramid_levels);
    const auto moving_pyr = build_pyramid(moving, mask, cfg.pyramid_levels);

    // A textureless image makes the photometric problem ill-posed even when
    // the normal matrix happens to be invertible.
    for (const Image* img : {&fixed, &moving}) {
        double sum = 0.0, sum_sq = 0.0;
        size_t n = 0;
        for (int y = 0; y < img->height; ++y)
            for (int x = 0; x < img->width; ++x) {
                if (!mask.at(x, y)) continue;
                sum += img->at(x, y);
                sum_sq += img->at(x, y) * img->at(x, y);
                ++n;
            }
        if (n == 0 || sum_sq / n - (sum / n) * (sum / n) < 1e-12)
            throw DegenerateGradient("register_pair: image has no masked texture");
    }

    // Optimize the sampling warp (fixed -> moving), i.e. the inverse of the
    // reported homography.
    Homography warp0 = invert(init);

    RegistrationResult result;
    result.iterations_used.assign(cfg.pyramid_levels, 0);
    bool level0_converged = false;

    for (int level = cfg.pyramid_levels - 1; level >= 0; --level) {
        const Image& lf = fixed_pyr[level].first;
        const Image& lm = moving_pyr[level].first;
        const FovMask& lmask = fixed_pyr[level].second;
        const FovMask& lmmask = moving_pyr[level].second;

        auto p = params_from_warp(warp_to_level(warp0, level));
        if (!projective) p[6] = p[7] = 0.0;

        NormalEquations eq = accumulate(lf, lm, lmask, lmmask, p, projective, true);
        if (eq.masked == 0 ||
            static_cast<double>(eq.valid) / eq.masked < cfg.min_valid_overlap_fraction)
            throw InsufficientOverlap(
                "register_pair: valid overlap " +
                std::to_string(eq.masked ? static_cast<double>(eq.valid) / eq.masked : 0.0) +
                " below " + std::to_string(cfg.min_valid_overlap_fraction) +
                " at level " + std::to_string(level));

        bool level_converged = false;
        int iters = 0;
        while (iters < cfg.max_iterations_per_level) {
            ++iters;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(eq.H);
            const double lmax = eig.eigenvalues().maxCoeff();
            const double lmin = eig.eigenvalues().minCoeff();
            if (!(lmax > 0.0) || lmin <= lmax / 1e12)
                throw DegenerateGradient(
                    "register_pair: normal matrix condition exceeds 1e12 at level " +
                    std::to_string(level));
            const Eigen::VectorXd delta =
                eig.eigenvectors() *
                (eig.eigenvectors().transpose() * (-eq.g))
                    .cwiseQuotient(eig.eigenvalues());

            // Step halving: accept the first step that does not increase cost.
            double alpha = 1.0;
            bool accepted = false;
            std::array<double, 8> p_try = p;
            NormalEquations eq_try;
            for (int halving = 0; halving <= 5; ++halving) {
                for (int i = 0; i < n_params; ++i) p_try[i] = p[i] + alpha * delta(i);
                eq_try = accumulate(lf, lm, lmask, lmmask, p_try, projective,
                                    false);
                if (eq_try.valid > 0 && eq_try.cost <= eq.cost) {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) {
                // No step decreases the cost: the update is zero, which
                // trivially satisfies the convergence threshold.
                level_converged = true;
                break;
            }

            const double step = corner_displacement(
                warp_from_params(p), warp_from_params(p_try), lf.width, lf.height);
            p = p_try;
            eq = accumulate(lf, lm, lmask, lmmask, p, projective, true);
            if (static_cast<double>(eq.valid) / eq.masked < cfg.min_valid_overlap_fraction)
                throw InsufficientOverlap(
                    "register_pair: overlap dropped below threshold at level " +
                    std::to_string(level));
            if (step < cfg.convergence_epsilon) {
                level_converged = true;
                break;
            }
        }
        result.iterations_used[level] = iters;
        warp0 = warp_to_level0(warp_from_params(p), level);
        if (level == 0) {
            level0_converged = level_converged;
            result.final_residual = eq.cost;
        }
    }

    result.h = invert(warp0);
    result.converged = level0_converged;
    return result;
}

std::vector<RegistrationResult>
register_sequence(std::span<const Image> frames, const FovMask& mask,
                  const RegistrationConfig& cfg) {
    if (frames.size() < 2)
        throw TooFewFrames("register_sequence: need at least 2 frames, got " +
                           std::to_string(frames.size()));
    for (const Image& f : frames)
        if (f.width != frames[0].width || f.height != frames[0].height)
            throw DimensionMismatch("register_sequence: frame shapes differ");

    std::vector<RegistrationResult> results(frames.size() - 1);
    parallel_for(results.size(), [&](size_t i) {
        try {
            results[i] = register_pair(frames[i + 1], frames[i], mask, cfg);
        } catch (const InsufficientOverlap&) {
            results[i] = RegistrationResult{};
        } catch (const DegenerateGradient&) {
            results[i] = RegistrationResult{};
        }
    });
    return results;
}

} // namespace fetmosaic
