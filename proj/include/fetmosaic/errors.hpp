#pragma once

#include <stdexcept>
#include <string>

namespace fetmosaic {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PointAtInfinity : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };
struct ZeroMatrix : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };

struct DimensionMismatch : Error { using Error::Error; };
struct ImageTooSmall : Error { using Error::Error; };
struct SizeTooSmall : Error { using Error::Error; };

struct InsufficientOverlap : Error { using Error::Error; };
struct DegenerateGradient : Error { using Error::Error; };
struct TooFewFrames : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };

struct MissingDirectory : Error { using Error::Error; };
struct ResolutionMismatch : Error { using Error::Error; };
struct IllegalLabelValue : Error { using Error::Error; };
struct IncompleteAssignment : Error { using Error::Error; };
struct FoldSizeViolation : Error { using Error::Error; };

struct IoError : Error { using Error::Error; };

} // namespace fetmosaic
