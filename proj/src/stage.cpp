#include "urlab/stage.hpp"

#include <algorithm>

#include "urlab/errors.hpp"

namespace urlab {

AmbientStage::AmbientStage(Triple t, ValidateTripleOptions opts) : triple_(std::move(t)) {
    if (auto rep = validate_triple(triple_, opts); !rep.ok())
        throw PreconditionError("stage triple is invalid: " + rep.str());
}

AmbientStage AmbientStage::single_retract_point(const std::string& label) {
    FiniteMetricSpace space({label}, {Scalar(0)});
    return AmbientStage(Triple(std::move(space), {0}, {Scalar(0)}));
}

bool AmbientStage::is_prefix_of(const AmbientStage& later) const {
    const Triple& a = triple_;
    const Triple& b = later.triple_;
    if (a.size() > b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.r(i) != b.r(i) || a.p(i) != b.p(i)) return false;
        for (std::size_t j = 0; j < a.size(); ++j)
            if (a.dist(i, j) != b.dist(i, j)) return false;
    }
    return true;
}

void AmbientStage::grow(Triple extended, AbsorptionRecord record) {
    const Triple& old = triple_;
    if (extended.size() < old.size())
        throw ShapeError("stage cannot shrink");
    for (std::size_t i = 0; i < old.size(); ++i) {
        if (extended.r(i) != old.r(i) || extended.p(i) != old.p(i))
            throw ShapeError("stage growth changed existing retraction/potential");
        for (std::size_t j = 0; j < old.size(); ++j)
            if (extended.dist(i, j) != old.dist(i, j))
                throw ShapeError("stage growth changed existing distances");
    }
    record.generation = generation_;
    record.points_added = extended.size() - old.size();
    triple_ = std::move(extended);
    log_.push_back(std::move(record));
}

std::pair<AmbientStage, Embedding> absorb(const AmbientStage& stage, const Triple& t,
                                          const std::vector<std::size_t>& partial_domain,
                                          const std::vector<std::size_t>& partial_image) {
    if (partial_domain.size() != partial_image.size())
        throw ShapeError("partial embedding domain/image size mismatch");
    if (partial_domain.empty())
        throw PreconditionError("absorb needs a nonempty partial embedding");
    if (!t.is_r_closed(partial_domain))
        throw PreconditionError("partial embedding domain is not a sub-triple of t");
    // the partial embedding must commute exactly
    Triple dom = t.sub_triple(partial_domain);
    Embedding part = measure_embedding(dom.space(), stage.triple().space(),
                                       partial_image);
    if (!part.isometric()) throw PreconditionError("partial embedding is not isometric");
    DiscrepancyReport rep = discrepancy(stage.triple(), part, dom);
    if (!rep.is_exact())
        throw PreconditionError("partial embedding does not commute exactly");

    Correspondence shared;
    for (std::size_t k = 0; k < partial_domain.size(); ++k)
        shared.emplace_back(partial_image[k], partial_domain[k]);
    Triple grown = amalgamate_max(stage.triple(), t, shared);

    // total embedding of t: shared points to their images, fresh in amalgam order
    std::vector<std::size_t> total(t.size(), SIZE_MAX);
    for (std::size_t k = 0; k < partial_domain.size(); ++k)
        total[partial_domain[k]] = partial_image[k];
    std::size_t next = stage.size();
    for (std::size_t i = 0; i < t.size(); ++i)
        if (total[i] == SIZE_MAX) total[i] = next++;

    AmbientStage out = stage;
    if (grown.size() > stage.size())
        out.grow(grown, AbsorptionRecord{0, "absorb",
                                         "t:" + std::to_string(t.size()) + " over " +
                                             std::to_string(partial_domain.size()),
                                         0});
    out.bump_generation();
    Embedding emb{std::move(total), Scalar(0)};
    DiscrepancyReport total_rep = discrepancy(out.triple(), emb, t);
    if (!total_rep.is_exact()) throw Error("absorb produced a non-commuting embedding (internal)");
    return {std::move(out), std::move(emb)};
}

}  // namespace urlab
