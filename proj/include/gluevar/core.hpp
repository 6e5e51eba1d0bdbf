#pragma once

#include <stdexcept>
#include <string>

namespace gluevar {

class parameter_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class not_differentiable_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class unsupported_regime_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class degenerate_weights_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A probability stored together with its complement, so that p -> 1 - p is an
// exact involution in floating point.
struct Prob {
    double value = 0.0;
    double complement = 1.0;

    static constexpr Prob of(double p) { return {p, 1.0 - p}; }
    static constexpr Prob complement_of(double p) { return {1.0 - p, p}; }
    constexpr Prob flipped() const { return {complement, value}; }

    friend constexpr bool operator==(const Prob&, const Prob&) = default;
};

// b - a, through the complements in the upper half so that mirrored intervals get identical widths
constexpr double gap(const Prob& a, const Prob& b) {
    return a.value >= 0.5 ? a.complement - b.complement : b.value - a.value;
}

enum class Direction { worst, best };
enum class DistClass { general, symmetric };
enum class Side { left, right };

inline const char* to_string(Direction d) { return d == Direction::worst ? "worst" : "best"; }
inline const char* to_string(DistClass c) { return c == DistClass::general ? "general" : "symmetric"; }

inline constexpr double slope_tie_tolerance = 1e-12;

}  // namespace gluevar
