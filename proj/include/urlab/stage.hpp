#pragma once

#include "urlab/amalgam.hpp"

namespace urlab {

struct AbsorptionRecord {
    std::size_t generation = 0;
    std::string kind;          // "absorb", "build", "embed", ...
    std::string detail;
    std::size_t points_added = 0;
};

/// A growing finite triple standing in for (𝕌₀, U, D). Earlier stages are
/// exact sub-triples of later ones: points are only ever appended and existing
/// distances, retraction values and potentials never change.
class AmbientStage {
public:
    AmbientStage() = default;
    explicit AmbientStage(Triple t, ValidateTripleOptions opts = {});

    /// The canonical seed: one retract point.
    static AmbientStage single_retract_point(const std::string& label = "o");

    const Triple& triple() const { return triple_; }
    std::size_t size() const { return triple_.size(); }
    std::size_t generation() const { return generation_; }
    const std::vector<AbsorptionRecord>& absorbed() const { return log_; }

    /// True iff this stage is an exact sub-triple (prefix) of the later one.
    bool is_prefix_of(const AmbientStage& later) const;

    // Engine internals: replace the triple with one that extends the current
    // prefix; shape-checked. Used by absorb/build/embed operations.
    void grow(Triple extended, AbsorptionRecord record);
    void bump_generation() { ++generation_; }

private:
    Triple triple_;
    std::size_t generation_ = 0;
    std::vector<AbsorptionRecord> log_;
};

/// Absorbs a triple into the stage by maximal amalgamation over an exactly
/// commuting partial embedding of an r-closed sub-triple of t. Returns the
/// grown stage and the total exactly-commuting embedding of t.
/// partial_domain lists t-indices; partial_image their stage images.
std::pair<AmbientStage, Embedding> absorb(const AmbientStage& stage, const Triple& t,
                                          const std::vector<std::size_t>& partial_domain,
                                          const std::vector<std::size_t>& partial_image);

}  // namespace urlab
