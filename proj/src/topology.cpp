#include "urlab/topology.hpp"

#include <algorithm>

#include "urlab/errors.hpp"

namespace urlab {

RetractionOnStage::RetractionOnStage(FiniteMetricSpace space, std::vector<std::size_t> map)
    : space_(std::move(space)), map_(std::move(map)) {
    const std::size_t n = space_.size();
    if (map_.size() != n) throw ShapeError("retraction map length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (map_[i] >= n) throw ShapeError("retraction index out of range");
        if (map_[map_[i]] != map_[i]) throw PreconditionError("retraction is not idempotent");
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (space_.dist(map_[i], map_[j]) > space_.dist(i, j))
                throw PreconditionError("retraction is not 1-Lipschitz");
    const auto retract = retract_points();
    derived_.resize(n);
    for (std::size_t i = 0; i < n; ++i) derived_[i] = distance_to_subset(space_, i, retract);
}

std::vector<std::size_t> RetractionOnStage::retract_points() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < map_.size(); ++i)
        if (map_[i] == i) out.push_back(i);
    return out;
}

namespace {

void check_same_stage(const RetractionOnStage& u, const RetractionOnStage& r) {
    if (!u.same_stage(r)) throw PreconditionError("retractions live on different stages");
}

void check_points(const RetractionOnStage& u, const std::vector<std::size_t>& xs) {
    for (std::size_t x : xs)
        if (x >= u.size()) throw ShapeError("foreign point in the test set");
}

}  // namespace

bool in_neighborhood_p(const RetractionOnStage& u, const RetractionOnStage& r,
                       const std::vector<std::size_t>& xs, const Scalar& eps) {
    check_same_stage(u, r);
    check_points(u, xs);
    for (std::size_t x : xs)
        if (!(u.space().dist(r.map(x), u.map(x)) < eps)) return false;
    return true;
}

bool in_neighborhood_pr(const RetractionOnStage& u, const RetractionOnStage& r,
                        const std::vector<std::size_t>& xs, const Scalar& eps) {
    if (!in_neighborhood_p(u, r, xs, eps)) return false;
    for (std::size_t x : xs)
        if (!(scalar_abs(u.derived_potential(x) - r.derived_potential(x)) < eps)) return false;
    return true;
}

bool in_neighborhood_u(const RetractionOnStage& u, const RetractionOnStage& r,
                       const Scalar& eps) {
    check_same_stage(u, r);
    for (std::size_t x = 0; x < u.size(); ++x)
        if (!(u.space().dist(r.map(x), u.map(x)) < eps)) return false;
    return true;
}

bool set_membership(const RetractionOnStage& u, const SetMembershipParams& params,
                    PropFourSet which) {
    if (params.n == 0) throw PreconditionError("n must be positive");
    const std::size_t k = params.emb.map.size();
    if (params.r_small.size() != k || params.p_small.size() != k || params.x >= k)
        throw ShapeError("malformed set-membership params");
    for (std::size_t v : params.emb.map)
        if (v >= u.size()) throw ShapeError("embedding leaves the stage");
    if (params.r_small[params.x] >= k) throw ShapeError("small retraction out of range");
    const Scalar inv_n{Rat(1, static_cast<long>(params.n))};
    const std::size_t ix = params.emb.map[params.x];
    switch (which) {
        case PropFourSet::E:
        case PropFourSet::B: {
            const Scalar bound = which == PropFourSet::E ? inv_n : Scalar(5) * inv_n;
            const std::size_t irx = params.emb.map[params.r_small[params.x]];
            return u.space().dist(u.map(ix), irx) < bound;
        }
        case PropFourSet::F:
        case PropFourSet::C: {
            const Scalar bound = which == PropFourSet::F ? inv_n : Scalar(3) * inv_n;
            return scalar_abs(u.derived_potential(ix) - params.p_small[params.x]) < bound;
        }
    }
    return false;
}

RetractionOnStage conjugate(const std::vector<std::size_t>& iso, const RetractionOnStage& u) {
    const std::size_t n = u.size();
    if (iso.size() != n) throw ShapeError("bijection length mismatch");
    std::vector<std::size_t> inv(n, SIZE_MAX);
    for (std::size_t i = 0; i < n; ++i) {
        if (iso[i] >= n || inv[iso[i]] != SIZE_MAX)
            throw PreconditionError("map is not a bijection");
        inv[iso[i]] = i;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (u.space().dist(iso[i], iso[j]) != u.space().dist(i, j))
                throw PreconditionError("map is not distance-preserving");
    std::vector<std::size_t> s(n);
    for (std::size_t x = 0; x < n; ++x) s[x] = inv[u.map(iso[x])];
    return RetractionOnStage(u.space(), std::move(s));
}

bool pr_equals_p_on_shared_retract(const RetractionOnStage& u, const RetractionOnStage& r,
                                   const std::vector<std::size_t>& xs, const Scalar& eps) {
    if (u.retract_points() != r.retract_points())
        throw PreconditionError("retract sets differ");
    return in_neighborhood_pr(u, r, xs, eps) == in_neighborhood_p(u, r, xs, eps);
}

}  // namespace urlab
