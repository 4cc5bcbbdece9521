#include "urlab/triple.hpp"

#include <algorithm>

#include "urlab/errors.hpp"

namespace urlab {

std::string TripleViolation::str() const {
    const std::string sx = std::to_string(x), sy = std::to_string(y);
    switch (kind) {
        case Kind::Metric: return "metric axiom violated near (" + sx + "," + sy + ")";
        case Kind::NotIdempotent: return "r(r(" + sx + ")) != r(" + sx + ")";
        case Kind::RetractionNotLipschitz:
            return "d(r(" + sx + "),r(" + sy + ")) > d(" + sx + "," + sy + ")";
        case Kind::PotentialNotLipschitz:
            return "|p(" + sx + ")-p(" + sy + ")| > d(" + sx + "," + sy + ")";
        case Kind::NegativePotential: return "p(" + sx + ") < 0";
        case Kind::ZeroSetMismatch: return "p(" + sx + ") = 0 xor r(" + sx + ") = " + sx;
        case Kind::PotentialAboveRetractDistance:
            return "p(" + sx + ") > dist(" + sx + ", retract)";
        case Kind::NotRealizable: return "d(" + sx + ",r(" + sx + ")) > 2 p(" + sx + ")";
    }
    return "?";
}

std::string TripleReport::str() const {
    std::string s;
    for (const auto& v : violations) {
        if (!s.empty()) s += "; ";
        s += v.str();
    }
    return s;
}

Triple::Triple(FiniteMetricSpace space, std::vector<std::size_t> retraction,
               std::vector<Scalar> potential)
    : space_(std::move(space)), retraction_(std::move(retraction)),
      potential_(std::move(potential)) {
    if (retraction_.size() != space_.size() || potential_.size() != space_.size())
        throw ShapeError("retraction/potential length does not match point count");
    for (std::size_t i = 0; i < retraction_.size(); ++i)
        if (retraction_[i] >= space_.size()) throw ShapeError("retraction index out of range");
}

std::vector<std::size_t> Triple::retract_points() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i)
        if (is_retract_point(i)) out.push_back(i);
    return out;
}

bool Triple::is_r_closed(const std::vector<std::size_t>& points) const {
    for (std::size_t p : points)
        if (std::find(points.begin(), points.end(), retraction_[p]) == points.end()) return false;
    return true;
}

Triple Triple::sub_triple(const std::vector<std::size_t>& points) const {
    if (!is_r_closed(points)) throw PreconditionError("point set is not closed under r");
    std::vector<std::size_t> pos(size(), size());
    for (std::size_t i = 0; i < points.size(); ++i) pos[points[i]] = i;
    std::vector<std::size_t> r;
    std::vector<Scalar> p;
    for (std::size_t pt : points) {
        r.push_back(pos[retraction_[pt]]);
        p.push_back(potential_[pt]);
    }
    return Triple(space_.restriction(points), std::move(r), std::move(p));
}

TripleReport validate_triple(const Triple& t, const ValidateTripleOptions& opts) {
    TripleReport report;
    const std::size_t n = t.size();
    for (const auto& mv : validate_metric(t.space()).violations)
        report.violations.push_back({TripleViolation::Kind::Metric, mv.x, mv.y});
    for (std::size_t i = 0; i < n; ++i) {
        if (t.r(t.r(i)) != t.r(i))
            report.violations.push_back({TripleViolation::Kind::NotIdempotent, i, 0});
        if (t.p(i).sign() < 0)
            report.violations.push_back({TripleViolation::Kind::NegativePotential, i, 0});
        if (t.p(i).is_zero() != (t.r(i) == i))
            report.violations.push_back({TripleViolation::Kind::ZeroSetMismatch, i, 0});
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (t.dist(t.r(i), t.r(j)) > t.dist(i, j))
                report.violations.push_back({TripleViolation::Kind::RetractionNotLipschitz, i, j});
            if (scalar_abs(t.p(i) - t.p(j)) > t.dist(i, j))
                report.violations.push_back({TripleViolation::Kind::PotentialNotLipschitz, i, j});
        }
    const auto retract = t.retract_points();
    if (!retract.empty())
        for (std::size_t i = 0; i < n; ++i)
            if (t.p(i) > distance_to_subset(t.space(), i, retract))
                report.violations.push_back(
                    {TripleViolation::Kind::PotentialAboveRetractDistance, i, 0});
    if (opts.realizability)
        for (std::size_t i = 0; i < n; ++i)
            if (t.r(i) != i && t.dist(i, t.r(i)) > Scalar(2) * t.p(i))
                report.violations.push_back({TripleViolation::Kind::NotRealizable, i, 0});
    return report;
}

std::optional<std::string> extension_spec_error(const ExtensionSpec& spec) {
    const Triple& t = spec.base;
    const std::size_t n = t.size();
    if (spec.f.size() != n) return "f does not cover the base points";
    KatetovFunction kf(t.space(), spec.f);
    if (!katetov_validate(kf)) return "f is not a katetov function";
    if (spec.mode == ExtensionSpec::Mode::NewRetractPoint) {
        if (!spec.new_potential.is_zero()) return "new retract point must have potential 0";
        for (std::size_t y = 0; y < n; ++y) {
            if (spec.f[t.r(y)] > spec.f[y]) return "f(r(y)) > f(y) at y=" + std::to_string(y);
            if (t.p(y) > spec.f[y]) return "p(y) > f(y) at y=" + std::to_string(y);
        }
    } else {
        if (spec.attach_to >= n) return "attach point out of range";
        if (!t.is_retract_point(spec.attach_to)) return "attach point is not a retract point";
        if (spec.new_potential.sign() <= 0) return "attached point needs positive potential";
        for (std::size_t y = 0; y < n; ++y) {
            if (t.dist(spec.attach_to, t.r(y)) > spec.f[y])
                return "d(c0, r(y)) > f(y) at y=" + std::to_string(y);
            if (scalar_abs(spec.new_potential - t.p(y)) > spec.f[y])
                return "|p' - p(y)| > f(y) at y=" + std::to_string(y);
        }
        if (spec.f[spec.attach_to] > Scalar(2) * spec.new_potential)
            return "f(c0) > 2 p' (not realizable)";
    }
    return std::nullopt;
}

namespace {

/// All reduced rationals k/d with 1 <= d <= denom_bound and 0 < k/d <= diam, ascending.
std::vector<Rat> rational_grid(unsigned denom_bound, const Rat& diam) {
    std::vector<Rat> grid;
    for (unsigned d = 1; d <= denom_bound; ++d)
        for (BigInt k = 1; Rat(k, d) <= diam; ++k) {
            Rat v(k, d);
            if (denominator(v) == BigInt(d)) grid.push_back(v);
        }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

bool f_less(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (b[i] < a[i]) return false;
    }
    return false;
}

}  // namespace

std::vector<ExtensionSpec> enumerate_one_point_extensions(const Triple& t, unsigned denom_bound,
                                                          const Rat& diam_bound) {
    if (denom_bound == 0 || diam_bound <= 0)
        throw PreconditionError("enumeration bounds must be positive");
    const std::vector<Rat> grid = rational_grid(denom_bound, diam_bound);
    const std::size_t n = t.size();
    std::vector<ExtensionSpec> news, attached;

    std::vector<std::size_t> idx(n, 0);
    std::vector<Scalar> f(n);
    const auto retract = t.retract_points();
    bool done = grid.empty() || n == 0;
    while (!done) {
        for (std::size_t i = 0; i < n; ++i) f[i] = Scalar(grid[idx[i]]);
        {
            ExtensionSpec s{t, ExtensionSpec::Mode::NewRetractPoint, 0, f, Scalar(0)};
            if (!extension_spec_error(s)) news.push_back(std::move(s));
        }
        for (std::size_t c0 : retract)
            for (const Rat& q : grid) {
                ExtensionSpec s{t, ExtensionSpec::Mode::AttachTo, c0, f, Scalar(q)};
                if (!extension_spec_error(s)) attached.push_back(std::move(s));
            }
        // advance the f-vector odometer
        std::size_t pos = n;
        while (pos > 0) {
            --pos;
            if (++idx[pos] < grid.size()) break;
            idx[pos] = 0;
            if (pos == 0) done = true;
        }
    }
    auto spec_less = [](const ExtensionSpec& a, const ExtensionSpec& b) {
        if (f_less(a.f, b.f)) return true;
        if (f_less(b.f, a.f)) return false;
        if (a.attach_to != b.attach_to) return a.attach_to < b.attach_to;
        return a.new_potential < b.new_potential;
    };
    std::sort(news.begin(), news.end(), spec_less);
    std::sort(attached.begin(), attached.end(), spec_less);
    news.insert(news.end(), std::make_move_iterator(attached.begin()),
                std::make_move_iterator(attached.end()));
    return news;
}

Triple apply_extension(const Triple& t, const ExtensionSpec& spec, const std::string& label) {
    if (!spec.base.same_structure(t)) throw SpecError("stale extension spec (base mismatch)");
    if (auto err = extension_spec_error(spec)) throw SpecError("invalid extension spec: " + *err);
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t.space().label(i) == label) throw SpecError("duplicate label '" + label + "'");
    const std::size_t b = t.size();
    FiniteMetricSpace space = t.space().with_point(label, spec.f);
    std::vector<std::size_t> r = t.retraction();
    std::vector<Scalar> p = t.potential();
    if (spec.mode == ExtensionSpec::Mode::NewRetractPoint) {
        r.push_back(b);
        p.push_back(Scalar(0));
    } else {
        r.push_back(spec.attach_to);
        p.push_back(spec.new_potential);
    }
    Triple out(std::move(space), std::move(r), std::move(p));
    if (auto report = validate_triple(out); !report.ok())
        throw SpecError("extension produced an invalid triple: " + report.str());
    return out;
}

DiscrepancyReport discrepancy(const Triple& ambient, const Embedding& i, const Triple& small) {
    Embedding checked = measure_embedding(small.space(), ambient.space(), i.map);
    if (!checked.isometric()) throw PreconditionError("embedding is not isometric");
    Scalar commut(0), pot(0);
    for (std::size_t x = 0; x < small.size(); ++x) {
        const std::size_t ix = i.map[x];
        commut = scalar_max(commut, ambient.dist(ambient.r(ix), i.map[small.r(x)]));
        pot = scalar_max(pot, scalar_abs(ambient.p(ix) - small.p(x)));
    }
    return DiscrepancyReport{std::move(commut), std::move(pot)};
}

namespace {

void commuting_backtrack(const Triple& small, const Triple& ambient, const Scalar& tol,
                         std::vector<std::size_t>& partial, std::vector<bool>& used,
                         std::vector<std::pair<Embedding, DiscrepancyReport>>& out) {
    const std::size_t i = partial.size();
    if (i == small.size()) {
        Embedding emb{partial, Scalar(0)};
        DiscrepancyReport rep = discrepancy(ambient, emb, small);
        if (rep.commutation <= tol && rep.potential <= tol)
            out.emplace_back(std::move(emb), std::move(rep));
        return;
    }
    for (std::size_t t = 0; t < ambient.size(); ++t) {
        if (used[t]) continue;
        if (scalar_abs(ambient.p(t) - small.p(i)) > tol) continue;
        bool fits = true;
        for (std::size_t j = 0; j < i && fits; ++j)
            fits = ambient.dist(partial[j], t) == small.dist(j, i);
        // prune on commutation where both ends are already placed
        if (fits && small.r(i) <= i) {
            const std::size_t ri = small.r(i) == i ? t : partial[small.r(i)];
            if (ambient.dist(ambient.r(t), ri) > tol) fits = false;
        }
        if (!fits) continue;
        partial.push_back(t);
        used[t] = true;
        commuting_backtrack(small, ambient, tol, partial, used, out);
        used[t] = false;
        partial.pop_back();
    }
}

}  // namespace

std::vector<std::pair<Embedding, DiscrepancyReport>> find_commuting_embeddings(
    const Triple& small, const Triple& ambient, const Scalar& tol) {
    if (tol.sign() < 0) throw PreconditionError("tolerance must be nonnegative");
    std::vector<std::pair<Embedding, DiscrepancyReport>> out;
    if (small.size() > ambient.size()) return out;
    std::vector<std::size_t> partial;
    std::vector<bool> used(ambient.size(), false);
    commuting_backtrack(small, ambient, tol, partial, used, out);
    return out;
}

}  // namespace urlab
