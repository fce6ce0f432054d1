#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace rk::ckd_epi {

// CKD-EPI 2021 creatinine equation without the race coefficient:
//   Inker LA et al. New creatinine- and cystatin C-based equations to estimate
//   GFR without race. N Engl J Med 2021;385:1737-1749.
//   eGFR = 142 * min(Scr/k, 1)^a * max(Scr/k, 1)^-1.200 * 0.9938^age * (1.012 if female)
struct SexCoefficients {
    double kappa;  // creatinine knot, mg/dL
    double alpha;  // exponent below the knot
    double factor; // sex multiplier
};

inline constexpr double kScale = 142.0;
inline constexpr double kExponentAboveKnot = -1.200;
inline constexpr double kAgeBase = 0.9938;
inline constexpr SexCoefficients kFemale{0.7, -0.241, 1.012};
inline constexpr SexCoefficients kMale{0.9, -0.302, 1.0};

inline constexpr double kDefaultThreshold = 60.0;

enum class Sex { Female, Male };

// Accepts F/M, female/male, woman/man (case-insensitive).
Sex parse_sex(std::string_view token);

struct Record {
    double creatinine_mg_dl;
    double age_years;
    Sex sex;
};

// mL/min/1.73m^2. Throws DomainError for nonpositive creatinine or age.
double egfr(const Record& r);

// 1 iff eGFR is strictly below `threshold`.
std::vector<int> label(std::span<const Record> rows, double threshold = kDefaultThreshold);

} // namespace rk::ckd_epi
