#pragma once

#include "urlab/rationalize.hpp"

namespace urlab {

struct StageBounds {
    unsigned denom = 1;
    Rat diam{1};
    std::size_t sub_size = 1;
};

struct BuildLimits {
    std::size_t max_points = 100000;
    long long max_wall_ms = -1;  // negative: unlimited
};

/// Grows the stage until, for every r-closed sub-triple S of the *input*
/// stage within bounds and every admissible one-point extension spec of S,
/// the stage contains an exactly-commuting copy of the extended triple.
/// Witness checks are memoized by isomorphism type. Deterministic order:
/// sub-triples lexicographic, then spec order.
AmbientStage build_stage(const AmbientStage& stage, const StageBounds& bounds,
                         const BuildLimits& limits = {});

/// Existence-only variant of find_commuting_embeddings.
bool has_commuting_embedding(const Triple& small, const Triple& ambient, const Scalar& tol);

/// All r-closed point subsets of t with 1 <= size <= max_size, sizes ascending,
/// equal sizes in lexicographic index order.
std::vector<std::vector<std::size_t>> r_closed_subsets(const Triple& t, std::size_t max_size);

/// Canonical key of a triple's isomorphism type (point relabeling).
std::string triple_type_key(const Triple& t);

struct UrStarCase {
    Triple a;      // the approximately embedded triple
    Embedding i;   // its embedding into the stage, discrepancy < eps
    Triple b;      // rational one-point extension of a (a's points first, b last)
};

struct UrStarBudget {
    bool allow_virtual = true;        // try one-point-extension witnesses
    std::size_t max_candidates = 1 << 20;
};

struct UrStarVerdict {
    bool success = false;
    bool exhausted = false;  // search space exhausted; not a refutation
    Embedding i_prime;       // on success; virtual b-point gets index stage.size()
    bool virtual_point = false;
    std::vector<std::size_t> anchor;  // stage indices carrying the virtual extension
    std::vector<Scalar> anchor_f;     // its distance profile
    Scalar displacement;  // max over A of d(i(x), i'(x)); success needs < 2 eps
    Scalar commutation;   // max over B of d(U i'(x), i' r'(x)); success needs < 5 eps
    Scalar potential;     // max over B of |D i'(x) − p'(x)|; success needs < 3 eps
    std::size_t candidates_tried = 0;
    std::string note;
};

/// Searches existing stage points and (optionally) pinned one-point extension
/// candidates for an embedding i' of B realizing the three bounds of the
/// approximate extension property: displacement < 2 eps on A, commutation
/// < 5 eps and potential gap < 3 eps on B. Pure search; the stage is not modified.
UrStarVerdict check_ur_star(const AmbientStage& stage, const Rat& eps, const UrStarCase& c,
                            const UrStarBudget& budget = {});

/// The fixed epsilon schedule eps_n = eps·2^{-n}/44 and its 21-sum bound 21eps/22.
Rat aprox_schedule_term(const Rat& eps, unsigned n);
Rat aprox_schedule_bound(const Rat& eps);

struct StepInputs {
    Triple b;        // target triple B = A ∪ {b}, b last
    Embedding i;     // exactly commuting embedding of the A-part into the stage
    Triple b_n;      // rational approximant of B (same shape, matching pattern)
    Embedding j_n;   // embedding of b_n into the stage, discrepancy < (5e, 3e)
};

struct StepReport {
    Scalar j_commutation, j_potential;   // measured input discrepancy
    std::size_t completion_added = 0;    // |C_n|
    bool fused_b = false;                // b coincided with b_n's image
    Scalar g_prime_b_bn;                 // minimal-amalgam bridge g'_n(b, b_n)
    Scalar rho_b_bn;                     // after regularization
    bool claim_g_ok = false;             // g'_n(b,b_n) < 25 eps_n / 2
    bool claim_rho_ok = false;           // rho_n(b,b_n) < 35 eps_n / 2
    Scalar rmc_max_shift;                // max d_{n+1} − rho_n
    Scalar h_displacement;               // nearby-embedding displacement (= eps_{n+1}/2)
    Scalar h_commutation, h_potential;   // discrepancy of the copy embedding
    UrStarVerdict urstar;
    Scalar glue_bridge;                  // matched-pair distance (= eps_{n+1}/2 exactly)
    AmbientStage stage_out;
    Triple chain_out;                    // B glued with the B_{n+1} copy
    std::vector<std::size_t> chain_copy;  // chain indices of the glued copy
};

/// One inductive step of the approximation theorem: completion, maximal and
/// minimal amalgamation, regularization, rationalization, nearby embedding,
/// approximate-extension search, and the eps-glue onto the chain. Asserts the
/// two claim bounds and records every measured quantity.
StepReport aprox_step(const AmbientStage& stage, const StepInputs& in, const Rat& eps_n);

struct GameRound {
    bool covered = false;       // Adam's no-op branch fired
    std::size_t added = 0;      // points Adam appended (0, 1 or 2)
    std::size_t cursor = 0;     // the cursor value the round looked at
};

struct GameState {
    AmbientStage stage;
    std::vector<Triple> chain;       // X_0 ⊆ X_1 ⊆ ...
    std::vector<Embedding> maps;     // f_k into the stage, discrepancy (0,0)
    std::size_t cursor = 0;
    std::vector<GameRound> rounds;
};

/// Seeds the chain with a single retract point mapped to the stage's first
/// retract point.
GameState new_game(const AmbientStage& stage);

/// Eve hands a triple extending the chain head; Adam absorbs it, then either
/// skips (cursor point already covered) or pulls back the cursor point and
/// its retraction image into the chain.
GameState adam_move(GameState gs, const Triple& eve);

/// Alternates Eve's scripted extension specs with Adam's moves for the given
/// number of rounds. Script entries apply to the current chain head; a short
/// script leaves Eve passing.
GameState play_game(const AmbientStage& stage, const std::vector<ExtensionSpec>& script,
                    std::size_t rounds);

/// Distance-preserving bijection I with I∘r_t = r_u∘I and p_t = p_u∘I, or
/// nullopt. Exhaustive over bijections, first in lexicographic order.
std::optional<std::vector<std::size_t>> find_equivariant_isometry(const Triple& t,
                                                                  const Triple& u);

}  // namespace urlab
