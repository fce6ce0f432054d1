#include "rk/models.hpp"

#include "rk/error.hpp"
#include "rk/metrics.hpp"
#include "rk/rng.hpp"
#include "rk/text.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace rk::models {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct Design {
    Matrix x;
    std::vector<int> y;
    std::size_t n_pos = 0;
};

Design design_of(const TabularDataset& ds) {
    if (!ds.labels()) throw FitError("training data has no labels");
    Design d;
    const auto flat = ds.numeric_matrix();
    d.x = Eigen::Map<const Matrix>(flat.data(), static_cast<Eigen::Index>(ds.n_rows()),
                                   static_cast<Eigen::Index>(ds.n_cols()));
    d.y = *ds.labels();
    for (int v : d.y) d.n_pos += v == 1;
    if (d.n_pos == 0 || d.n_pos == d.y.size()) throw FitError("training labels contain a single class");
    return d;
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void check_features(const std::vector<std::string>& expected, const TabularDataset& ds) {
    const auto names = ds.column_names();
    if (names == expected) return;
    std::string missing, extra;
    for (const auto& n : expected) {
        if (std::find(names.begin(), names.end(), n) == names.end()) missing += (missing.empty() ? "" : ", ") + n;
    }
    for (const auto& n : names) {
        if (std::find(expected.begin(), expected.end(), n) == expected.end()) extra += (extra.empty() ? "" : ", ") + n;
    }
    std::string msg = "dataset columns do not match the model features";
    if (!missing.empty()) msg += "; missing: " + missing;
    if (!extra.empty()) msg += "; unexpected: " + extra;
    if (missing.empty() && extra.empty()) msg += " (column order differs)";
    throw SchemaError(msg);
}

} // namespace

LogisticModel fit_logistic(const TabularDataset& train, double c, const LogisticOptions& opts) {
    if (!(c > 0.0)) throw ArgumentError("inverse regularisation strength c must be positive");
    auto d = design_of(train);
    const auto n = d.x.rows();
    const auto p = d.x.cols();

    LogisticModel m;
    m.features = train.column_names();
    m.c = c;
    const double nd = static_cast<double>(n);
    m.class_weight1 = nd / (2.0 * static_cast<double>(d.n_pos));
    m.class_weight0 = nd / (2.0 * static_cast<double>(static_cast<std::size_t>(n) - d.n_pos));

    if (opts.standardize) {
        Standardizer st;
        for (Eigen::Index j = 0; j < p; ++j) {
            // Encoded binary columns keep their 0/1 scale.
            if (train.columns()[static_cast<std::size_t>(j)].kind != ColumnKind::Continuous) {
                st.mean.push_back(0.0);
                st.scale.push_back(1.0);
                continue;
            }
            const double mean = d.x.col(j).mean();
            const double var = (d.x.col(j).array() - mean).square().mean();
            const double sd = std::sqrt(var);
            st.mean.push_back(mean);
            st.scale.push_back(sd > 0.0 ? sd : 1.0);
            d.x.col(j) = (d.x.col(j).array() - mean) / st.scale.back();
        }
        m.standardizer = std::move(st);
    }

    Vector s(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = d.y[static_cast<std::size_t>(i)];
        s(i) = d.y[static_cast<std::size_t>(i)] == 1 ? m.class_weight1 : m.class_weight0;
    }
    Matrix xa(n, p + 1);
    xa.leftCols(p) = d.x;
    xa.col(p).setOnes();
    Vector penalty = Vector::Constant(p + 1, 1.0 / c);
    penalty(p) = 0.0;

    const auto objective = [&](const Vector& theta) {
        const Vector z = xa * theta;
        double f = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) f += s(i) * (softplus(z(i)) - y(i) * z(i));
        return f + 0.5 * (penalty.array() * theta.array().square()).sum();
    };

    Vector theta = Vector::Zero(p + 1);
    double f = objective(theta);
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        const Vector z = xa * theta;
        Vector r(n), h(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double pi = sigmoid(z(i));
            r(i) = s(i) * (pi - y(i));
            h(i) = s(i) * pi * (1.0 - pi);
        }
        const Vector g = xa.transpose() * r + penalty.cwiseProduct(theta);
        if (g.norm() <= opts.gradient_tolerance) {
            m.converged = true;
            break;
        }
        Matrix hess = xa.transpose() * h.asDiagonal() * xa;
        hess.diagonal() += penalty;
        hess(p, p) += 1e-12;
        Vector step = hess.ldlt().solve(g);
        if (!step.allFinite()) step = g;
        const double slope = g.dot(step);
        double t = 1.0;
        Vector next = theta - step;
        double f_next = objective(next);
        while (f_next > f - 1e-4 * t * slope && t > 1e-14) {
            t *= 0.5;
            next = theta - t * step;
            f_next = objective(next);
        }
        if (!(f_next <= f)) break; // no descent possible at working precision
        theta = next;
        f = f_next;
    }
    if (!m.converged) {
        // A last gradient check covers termination on the iteration cap or a stalled line search.
        const Vector z = xa * theta;
        Vector r(n);
        for (Eigen::Index i = 0; i < n; ++i) r(i) = s(i) * (sigmoid(z(i)) - y(i));
        m.converged = (xa.transpose() * r + penalty.cwiseProduct(theta)).norm() <= opts.gradient_tolerance;
    }
    m.iterations = it;
    m.weights.assign(theta.data(), theta.data() + p);
    m.intercept = theta(p);
    return m;
}

GaussianNBModel fit_gnb(const TabularDataset& train, double var_smoothing) {
    if (!(var_smoothing >= 0.0)) throw ArgumentError("var_smoothing must be non-negative");
    const auto d = design_of(train);
    const auto p = d.x.cols();
    GaussianNBModel m;
    m.features = train.column_names();
    m.var_smoothing = var_smoothing;

    double max_var = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double mean = d.x.col(j).mean();
        max_var = std::max(max_var, (d.x.col(j).array() - mean).square().mean());
    }
    m.epsilon = var_smoothing * (max_var > 0.0 ? max_var : 1.0);

    for (int cls = 0; cls < 2; ++cls) {
        std::vector<Eigen::Index> rows;
        for (std::size_t i = 0; i < d.y.size(); ++i) {
            if (d.y[i] == cls) rows.push_back(static_cast<Eigen::Index>(i));
        }
        auto& mean = cls == 0 ? m.mean0 : m.mean1;
        auto& var = cls == 0 ? m.var0 : m.var1;
        const double nc = static_cast<double>(rows.size());
        for (Eigen::Index j = 0; j < p; ++j) {
            double sum = 0.0;
            for (auto r : rows) sum += d.x(r, j);
            const double mu = sum / nc;
            double ss = 0.0;
            for (auto r : rows) ss += (d.x(r, j) - mu) * (d.x(r, j) - mu);
            mean.push_back(mu);
            var.push_back(ss / nc + m.epsilon);
        }
        (cls == 0 ? m.prior0 : m.prior1) = nc / static_cast<double>(d.y.size());
    }
    for (std::size_t j = 0; j < m.var0.size(); ++j) {
        if (!(m.var0[j] > 0.0) || !(m.var1[j] > 0.0)) {
            throw FitError("feature '" + m.features[j] + "' has zero variance in a class; increase var_smoothing");
        }
    }
    return m;
}

double predict_row(const LogisticModel& m, std::span<const double> x) {
    double z = m.intercept;
    for (std::size_t j = 0; j < m.weights.size(); ++j) {
        double v = x[j];
        if (m.standardizer) v = (v - m.standardizer->mean[j]) / m.standardizer->scale[j];
        z += m.weights[j] * v;
    }
    return sigmoid(z);
}

double predict_row(const GaussianNBModel& m, std::span<const double> x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double lj0 = std::log(m.prior0);
    double lj1 = std::log(m.prior1);
    for (std::size_t j = 0; j < m.mean0.size(); ++j) {
        const double d0 = x[j] - m.mean0[j];
        const double d1 = x[j] - m.mean1[j];
        lj0 -= 0.5 * (std::log(two_pi * m.var0[j]) + d0 * d0 / m.var0[j]);
        lj1 -= 0.5 * (std::log(two_pi * m.var1[j]) + d1 * d1 / m.var1[j]);
    }
    // p1 = exp(lj1) / (exp(lj0) + exp(lj1))
    return sigmoid(lj1 - lj0);
}

ScoreSet predict_proba(const Model& model, const TabularDataset& ds, ScoreMeta meta) {
    const auto& features = std::visit([](const auto& m) -> const std::vector<std::string>& { return m.features; }, model);
    check_features(features, ds);
    const auto flat = ds.numeric_matrix();
    const std::size_t p = ds.n_cols();
    ScoreSet out;
    out.meta = std::move(meta);
    out.probs.reserve(ds.n_rows());
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        const std::span<const double> row(flat.data() + r * p, p);
        out.probs.push_back(std::visit([&](const auto& m) { return predict_row(m, row); }, model));
    }
    if (ds.labels()) out.labels = *ds.labels();
    else out.labels.assign(ds.n_rows(), 0);
    return out;
}

const char* to_string(Family f) noexcept { return f == Family::Logistic ? "logistic" : "gnb"; }
const char* param_name(Family f) noexcept { return f == Family::Logistic ? "c" : "var_smoothing"; }

Model fit(Family family, const TabularDataset& train, double param, const LogisticOptions& opts) {
    if (family == Family::Logistic) return fit_logistic(train, param, opts);
    return fit_gnb(train, param);
}

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ArgumentError("cross-validation needs at least 2 folds");
    Rng rng(seed);
    std::vector<std::size_t> fold(labels.size());
    std::size_t offset = 0;
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == cls) members.push_back(i);
        }
        rng.shuffle(std::span<std::size_t>(members));
        for (std::size_t j = 0; j < members.size(); ++j) fold[members[j]] = (offset + j) % k;
        offset += members.size();
    }
    return fold;
}

GridSearchResult grid_search_cv(const TabularDataset& train, Family family, const std::vector<double>& grid,
                                std::uint64_t seed, std::size_t folds, const LogisticOptions& opts) {
    if (grid.empty()) throw ArgumentError("empty hyperparameter grid");
    if (!train.labels()) throw FitError("training data has no labels");
    const auto& labels = *train.labels();
    const auto fold_of = stratified_folds(labels, folds, seed);

    std::vector<std::vector<std::size_t>> fit_rows(folds), held_rows(folds);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t f = 0; f < folds; ++f) (fold_of[i] == f ? held_rows : fit_rows)[f].push_back(i);
    }
    for (std::size_t f = 0; f < folds; ++f) {
        std::size_t pos = 0;
        for (auto i : held_rows[f]) pos += labels[i] == 1;
        if (pos == 0 || pos == held_rows[f].size()) {
            throw FitError("cross-validation fold " + std::to_string(f) +
                           " holds a single class; use fewer folds");
        }
    }

    GridSearchResult result;
    result.family = family;
    result.candidates = grid;
    result.folds = folds;
    for (double param : grid) {
        std::vector<double> scores;
        for (std::size_t f = 0; f < folds; ++f) {
            const auto model = fit(family, train.subset(fit_rows[f]), param, opts);
            scores.push_back(metrics::auroc(predict_proba(model, train.subset(held_rows[f]))));
        }
        double mean = 0.0;
        for (double v : scores) mean += v;
        mean /= static_cast<double>(scores.size());
        result.fold_scores.push_back(std::move(scores));
        result.mean_scores.push_back(mean);
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (result.mean_scores[i] > result.mean_scores[result.best_index]) result.best_index = i;
    }
    result.best_cv_score = result.mean_scores[result.best_index];
    result.best_params[param_name(family)] = grid[result.best_index];
    return result;
}

namespace {

constexpr std::string_view kModelHeader = "readiness-kit model v1";

std::string kv(const std::string& k, const std::string& v) { return k + " = " + v + "\n"; }
std::string num(double v) { return text::format_double17(v); }

} // namespace

std::string model_to_text(const Model& model) {
    std::string out(kModelHeader);
    out += '\n';
    if (const auto* m = std::get_if<LogisticModel>(&model)) {
        out += kv("family", "logistic");
        out += kv("c", num(m->c));
        out += kv("intercept", num(m->intercept));
        out += kv("class_weight_0", num(m->class_weight0));
        out += kv("class_weight_1", num(m->class_weight1));
        out += kv("standardized", m->standardizer ? "1" : "0");
        out += kv("converged", m->converged ? "1" : "0");
        out += kv("iterations", std::to_string(m->iterations));
        for (std::size_t j = 0; j < m->features.size(); ++j) {
            std::string line = m->features[j] + "\t" + num(m->weights[j]);
            if (m->standardizer) line += "\t" + num(m->standardizer->mean[j]) + "\t" + num(m->standardizer->scale[j]);
            out += kv("feature", line);
        }
    } else {
        const auto& g = std::get<GaussianNBModel>(model);
        out += kv("family", "gnb");
        out += kv("var_smoothing", num(g.var_smoothing));
        out += kv("epsilon", num(g.epsilon));
        out += kv("prior_0", num(g.prior0));
        out += kv("prior_1", num(g.prior1));
        for (std::size_t j = 0; j < g.features.size(); ++j) {
            out += kv("feature", g.features[j] + "\t" + num(g.mean0[j]) + "\t" + num(g.var0[j]) + "\t" +
                                     num(g.mean1[j]) + "\t" + num(g.var1[j]));
        }
    }
    return out;
}

Model model_from_text(std::string_view content) {
    std::map<std::string, std::string> scalars;
    std::vector<std::vector<std::string>> features;
    bool first = true;
    for (auto& line : text::split(content, '\n')) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first) {
            if (line != kModelHeader) throw ParseError("not a readiness-kit model file");
            first = false;
            continue;
        }
        if (line.empty()) continue;
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) throw ParseError("malformed model line '" + line + "'");
        const auto key = line.substr(0, eq);
        const auto value = line.substr(eq + 3);
        if (key == "feature") features.push_back(text::split(value, '\t'));
        else scalars[key] = value;
    }
    const auto get = [&](const std::string& k) {
        const auto it = scalars.find(k);
        if (it == scalars.end()) throw ParseError("model file lacks '" + k + "'");
        const auto v = text::parse_double(it->second);
        if (!v) throw ParseError("model field '" + k + "' is not a number");
        return *v;
    };
    const auto field = [](const std::vector<std::string>& f, std::size_t i) {
        const auto v = text::parse_double(f.at(i));
        if (!v) throw ParseError("model feature line holds a non-number");
        return *v;
    };
    const auto family = scalars.count("family") ? scalars["family"] : "";
    if (family == "logistic") {
        LogisticModel m;
        m.c = get("c");
        m.intercept = get("intercept");
        m.class_weight0 = get("class_weight_0");
        m.class_weight1 = get("class_weight_1");
        m.converged = get("converged") != 0.0;
        m.iterations = static_cast<int>(get("iterations"));
        const bool standardized = get("standardized") != 0.0;
        if (standardized) m.standardizer.emplace();
        for (const auto& f : features) {
            if (f.size() != (standardized ? 4u : 2u)) throw ParseError("malformed logistic feature line");
            m.features.push_back(f[0]);
            m.weights.push_back(field(f, 1));
            if (standardized) {
                m.standardizer->mean.push_back(field(f, 2));
                m.standardizer->scale.push_back(field(f, 3));
            }
        }
        return m;
    }
    if (family == "gnb") {
        GaussianNBModel g;
        g.var_smoothing = get("var_smoothing");
        g.epsilon = get("epsilon");
        g.prior0 = get("prior_0");
        g.prior1 = get("prior_1");
        for (const auto& f : features) {
            if (f.size() != 5) throw ParseError("malformed gnb feature line");
            g.features.push_back(f[0]);
            g.mean0.push_back(field(f, 1));
            g.var0.push_back(field(f, 2));
            g.mean1.push_back(field(f, 3));
            g.var1.push_back(field(f, 4));
        }
        return g;
    }
    throw ParseError("unknown model family '" + family + "'");
}

std::string grid_to_csv(const GridSearchResult& r) {
    std::vector<std::string> header = {param_name(r.family)};
    for (std::size_t f = 0; f < r.folds; ++f) header.push_back("fold" + std::to_string(f));
    header.push_back("mean_auroc");
    header.push_back("selected");
    std::string out = text::csv_row(header);
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
        std::vector<std::string> row = {text::format_double(r.candidates[i])};
        for (double v : r.fold_scores[i]) row.push_back(text::format_double(v));
        row.push_back(text::format_double(r.mean_scores[i]));
        row.push_back(i == r.best_index ? "1" : "0");
        out += text::csv_row(row);
    }
    return out;
}

} // namespace rk::models
