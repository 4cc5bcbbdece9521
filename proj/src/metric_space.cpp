#include "urlab/metric_space.hpp"

#include <algorithm>

#include "urlab/errors.hpp"

namespace urlab {

std::string MetricViolation::str() const {
    switch (kind) {
        case Kind::NonzeroDiagonal:
            return "d(" + std::to_string(x) + "," + std::to_string(x) + ") != 0";
        case Kind::Asymmetry:
            return "d(" + std::to_string(x) + "," + std::to_string(y) + ") != d(" +
                   std::to_string(y) + "," + std::to_string(x) + ")";
        case Kind::NonPositive:
            return "d(" + std::to_string(x) + "," + std::to_string(y) + ") <= 0";
        case Kind::Triangle:
            return "d(" + std::to_string(x) + "," + std::to_string(z) + ") > d(" +
                   std::to_string(x) + "," + std::to_string(y) + ") + d(" + std::to_string(y) +
                   "," + std::to_string(z) + ")";
    }
    return "?";
}

FiniteMetricSpace::FiniteMetricSpace(std::vector<std::string> labels, std::vector<Scalar> dist)
    : labels_(std::move(labels)), dist_(std::move(dist)) {
    if (dist_.size() != labels_.size() * labels_.size())
        throw ShapeError("distance matrix size " + std::to_string(dist_.size()) +
                         " does not match " + std::to_string(labels_.size()) + " points");
}

FiniteMetricSpace FiniteMetricSpace::with_point(const std::string& label,
                                                const std::vector<Scalar>& row) const {
    const std::size_t n = size();
    if (row.size() != n) throw ShapeError("distance row has wrong length");
    std::vector<std::string> labels = labels_;
    labels.push_back(label);
    std::vector<Scalar> d((n + 1) * (n + 1), Scalar(0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i * (n + 1) + j] = dist(i, j);
    for (std::size_t i = 0; i < n; ++i) {
        d[i * (n + 1) + n] = row[i];
        d[n * (n + 1) + i] = row[i];
    }
    return FiniteMetricSpace(std::move(labels), std::move(d));
}

FiniteMetricSpace FiniteMetricSpace::restriction(const std::vector<std::size_t>& points) const {
    std::vector<std::string> labels;
    labels.reserve(points.size());
    for (std::size_t p : points) {
        if (p >= size()) throw ShapeError("restriction index out of range");
        labels.push_back(labels_[p]);
    }
    std::vector<Scalar> d(points.size() * points.size(), Scalar(0));
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = 0; j < points.size(); ++j)
            d[i * points.size() + j] = dist(points[i], points[j]);
    return FiniteMetricSpace(std::move(labels), std::move(d));
}

ValidationReport validate_metric(const FiniteMetricSpace& space) {
    ValidationReport report;
    const std::size_t n = space.size();
    for (std::size_t i = 0; i < n; ++i)
        if (!space.dist(i, i).is_zero())
            report.violations.push_back({MetricViolation::Kind::NonzeroDiagonal, i, i, 0});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (space.dist(i, j) != space.dist(j, i))
                report.violations.push_back({MetricViolation::Kind::Asymmetry, i, j, 0});
            if (space.dist(i, j).sign() <= 0)
                report.violations.push_back({MetricViolation::Kind::NonPositive, i, j, 0});
        }
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) {
            if (y == x) continue;
            for (std::size_t z = x + 1; z < n; ++z) {
                if (z == y) continue;
                if (space.dist(x, z) > space.dist(x, y) + space.dist(y, z))
                    report.violations.push_back({MetricViolation::Kind::Triangle, x, y, z});
            }
        }
    return report;
}

KatetovFunction::KatetovFunction(FiniteMetricSpace base, std::vector<Scalar> values)
    : base_(std::move(base)), values_(std::move(values)) {
    if (values_.size() != base_.size())
        throw ShapeError("katetov values do not cover the base points");
}

bool katetov_validate(const KatetovFunction& f) {
    const auto& b = f.base();
    const std::size_t n = b.size();
    for (std::size_t i = 0; i < n; ++i)
        if (f.value(i).sign() <= 0) return false;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const Scalar& d = b.dist(i, j);
            if (scalar_abs(f.value(i) - f.value(j)) > d) return false;
            if (d > f.value(i) + f.value(j)) return false;
        }
    return true;
}

FiniteMetricSpace extend_one_point(const FiniteMetricSpace& space, const KatetovFunction& f,
                                   const std::string& label) {
    if (!f.base().same_metric(space))
        throw PreconditionError("katetov function is not over the given space");
    if (!katetov_validate(f)) throw PreconditionError("invalid katetov function");
    for (std::size_t i = 0; i < space.size(); ++i)
        if (space.label(i) == label) throw PreconditionError("duplicate label '" + label + "'");
    return space.with_point(label, f.values());
}

Embedding measure_embedding(const FiniteMetricSpace& source, const FiniteMetricSpace& target,
                            std::vector<std::size_t> map) {
    if (map.size() != source.size()) throw ShapeError("embedding map has wrong length");
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (map[i] >= target.size()) throw ShapeError("embedding target index out of range");
        for (std::size_t j = i + 1; j < map.size(); ++j)
            if (map[i] == map[j]) throw PreconditionError("embedding map is not injective");
    }
    Scalar worst(0);
    for (std::size_t i = 0; i < map.size(); ++i)
        for (std::size_t j = i + 1; j < map.size(); ++j) {
            Scalar gap = scalar_abs(target.dist(map[i], map[j]) - source.dist(i, j));
            if (gap > worst) worst = gap;
        }
    return Embedding{std::move(map), std::move(worst)};
}

namespace {

void embed_backtrack(const FiniteMetricSpace& a, const FiniteMetricSpace& b,
                     std::vector<std::size_t>& partial, std::vector<bool>& used,
                     std::vector<Embedding>& out) {
    const std::size_t i = partial.size();
    if (i == a.size()) {
        out.push_back(Embedding{partial, Scalar(0)});
        return;
    }
    for (std::size_t t = 0; t < b.size(); ++t) {
        if (used[t]) continue;
        bool fits = true;
        for (std::size_t j = 0; j < i; ++j)
            if (b.dist(partial[j], t) != a.dist(j, i)) {
                fits = false;
                break;
            }
        if (!fits) continue;
        partial.push_back(t);
        used[t] = true;
        embed_backtrack(a, b, partial, used, out);
        used[t] = false;
        partial.pop_back();
    }
}

}  // namespace

std::vector<Embedding> find_isometric_embeddings(const FiniteMetricSpace& a,
                                                 const FiniteMetricSpace& b) {
    std::vector<Embedding> out;
    if (a.size() > b.size()) return out;
    std::vector<std::size_t> partial;
    std::vector<bool> used(b.size(), false);
    embed_backtrack(a, b, partial, used, out);
    return out;
}

Scalar distance_to_subset(const FiniteMetricSpace& space, std::size_t x,
                          const std::vector<std::size_t>& s) {
    if (s.empty()) throw PreconditionError("distance to empty subset");
    if (x >= space.size()) throw ShapeError("point index out of range");
    Scalar best = space.dist(x, s[0]);
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i] >= space.size()) throw ShapeError("subset index out of range");
        best = scalar_min(best, space.dist(x, s[i]));
    }
    return best;
}

}  // namespace urlab
