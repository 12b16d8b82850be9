#pragma once

#include <array>
#include <span>
#include <vector>

#include "fetmosaic/homography.hpp"
#include "fetmosaic/image.hpp"

namespace fetmosaic {

enum class Parameterization { affine6, projective8 };

struct RegistrationConfig {
    int pyramid_levels = 4;
    int max_iterations_per_level = 50;
    double convergence_epsilon = 1e-3; // parameter-update norm, px
    Parameterization parameterization = Parameterization::affine6;
    double min_valid_overlap_fraction = 0.25;
};

struct RegistrationResult {
    // Maps moving-frame coordinates into fixed-frame coordinates.
    Homography h;
    // Mean squared photometric error over valid masked pixels.
    double final_residual = 0.0;
    std::vector<int> iterations_used; // per level, coarse to fine
    bool converged = false;
};

// Level 0 is the input; each next level is smoothed with a 5x5 binomial
// kernel and decimated by 2. Masks decimate conservatively (true only when
// the whole 5x5 support is true).
std::vector<std::pair<Image, FovMask>>
build_pyramid(const Image& img, const FovMask& mask, int levels);

// Coarse-to-fine Gauss-Newton minimization of the masked photometric loss
//   sum [fixed(x) - moving(w(x))]^2
// with step halving. Throws InsufficientOverlap when fewer than
// min_valid_overlap_fraction of masked pixels have a valid warped sample,
// DegenerateGradient when the normal matrix is near-singular.
RegistrationResult register_pair(const Image& fixed, const Image& moving,
                                 const FovMask& mask,
                                 const RegistrationConfig& cfg,
                                 const Homography& init = Homography::identity());

// result[i] registers frames[i] (moving) onto frames[i+1] (fixed). Failed
// pairs fall back to identity with converged = false instead of aborting.
std::vector<RegistrationResult>
register_sequence(std::span<const Image> frames, const FovMask& mask,
                  const RegistrationConfig& cfg);

namespace detail {

// Photometric residual r = moving(W_p(x, y)) - fixed(x, y) for one pixel,
// where W_p is the affine (6) or projective (8) sampling warp from fixed to
// moving coordinates. Returns false when the warped sample is out of bounds,
// or outside moving_mask when one is given (frame content outside the field
// of view is zeroed and must not drive the fit). When jac is non-null it
// receives dr/dp for the active parameters.
bool residual_at(const Image& fixed, const Image& moving, int x, int y,
                 std::span<const double> p, bool projective,
                 double* r, std::array<double, 8>* jac,
                 const FovMask* moving_mask = nullptr);

} // namespace detail

} // namespace fetmosaic
