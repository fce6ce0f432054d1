#include "rk/ckd_epi.hpp"

#include "rk/error.hpp"
#include "rk/text.hpp"

#include <algorithm>
#include <cmath>

namespace rk::ckd_epi {

Sex parse_sex(std::string_view token) {
    const std::string t = text::lower(text::trim(token));
    if (t == "f" || t == "female" || t == "woman") return Sex::Female;
    if (t == "m" || t == "male" || t == "man") return Sex::Male;
    throw DomainError("unrecognised sex token '" + std::string(token) + "'");
}

double egfr(const Record& r) {
    if (!(r.creatinine_mg_dl > 0.0)) throw DomainError("creatinine must be positive");
    if (!(r.age_years > 0.0)) throw DomainError("age must be positive");
    const auto& k = r.sex == Sex::Female ? kFemale : kMale;
    const double ratio = r.creatinine_mg_dl / k.kappa;
    return kScale * std::pow(std::min(ratio, 1.0), k.alpha) * std::pow(std::max(ratio, 1.0), kExponentAboveKnot) *
           std::pow(kAgeBase, r.age_years) * k.factor;
}

std::vector<int> label(std::span<const Record> rows, double threshold) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(egfr(r) < threshold ? 1 : 0);
    return out;
}

} // namespace rk::ckd_epi
