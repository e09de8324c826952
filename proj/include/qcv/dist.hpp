#pragma once

#include <map>
#include <string>
#include <vector>

#include "qcv/partfrac.hpp"
#include "qcv/series.hpp"

namespace qcv {

// A region-tagged rational summand.  `dirs` assigns every binomial factor
// (1 - M) of the denominator that involves a spectral variable an expansion
// direction: +1 expands in powers of M, -1 in powers of M^(-1).  Binomials in
// parameters only stay as invertible coefficients and carry no direction.
struct RegularTerm {
    RatFun f;
    std::map<Monomial, int, MonomialLess> dirs;
};

// delta(m): support m = 1.  `pivot` is the variable eliminated from the
// coefficient via the support relation (the lexicographically last spectral
// name in m), stored with positive exponent.
struct DeltaArg {
    Monomial m;
    VarId pivot = -1;
};

struct DeltaTerm {
    std::vector<DeltaArg> margs; // multiplicative deltas, jointly independent
    std::vector<VarId> aargs;    // additive deltas at var = 0 (Yangian)
    RegularTerm coeff;           // free of every pivot / additive variable
};

// Finite sum of regular and delta summands over a fixed variable context.
class DistExpr {
public:
    explicit DistExpr(const VarTable& t) : ctx_(&t) {}

    static DistExpr zero(const VarTable& t) { return DistExpr(t); }
    static DistExpr one(const VarTable& t);
    static DistExpr from_regular(const VarTable& t, RegularTerm r);

    const VarTable& ctx() const { return *ctx_; }
    bool structurally_zero() const { return regs.empty() && dels.empty(); }
    bool is_zero() const { return structurally_zero(); } // fast path for matrices

    DistExpr operator+(const DistExpr& o) const;
    DistExpr operator-(const DistExpr& o) const;
    DistExpr operator-() const;
    DistExpr operator*(const DistExpr& o) const;

    std::vector<RegularTerm> regs;
    std::vector<DeltaTerm> dels;

private:
    const VarTable* ctx_;
};

// Construction -----------------------------------------------------------

// iota-expansion of f with per-variable region tags; every denominator
// binomial touching a spectral variable must get a consistent direction.
DistExpr dist_from_ratfun(const VarTable& t, const RatFun& f,
                          const std::map<VarId, Region>& tags);

// delta with a monomial argument (at least one spectral variable).
DistExpr dist_delta(const VarTable& t, const Monomial& m);

// additive delta supported at var = 0.
DistExpr dist_delta_add(const VarTable& t, VarId v);

// Operations ---------------------------------------------------------------

DistExpr dist_scale(const DistExpr& d, const RatFun& c); // c with parameter-only den
bool dist_eq(const DistExpr& a, const DistExpr& b);
bool dist_is_zero(const DistExpr& a);

// Substitute v -> target monomial in every summand (spectral shifts, variable
// renames, kappa -> 1).
DistExpr dist_substitute(const DistExpr& d, VarId v, const Monomial& target);

// Reciprocal of a single invertible region-tagged rational term; `tags`
// supplies regions for the binomials of the new denominator.
DistExpr dist_inverse(const DistExpr& d, const std::map<VarId, Region>& tags);

std::string dist_str(const DistExpr& d);

// Truncation oracle ---------------------------------------------------------

// Exact bilateral coefficients inside a per-variable window box.  Keys carry
// the scaled exponents of the windowed spectral variables; coefficients are
// RatFuns in the parameters.
struct CoeffTable {
    std::map<ExpVec, RatFun> coeffs;
};

struct Window {
    std::int64_t lo = 0, hi = 0;
};

CoeffTable truncate(const DistExpr& d, const std::map<VarId, Window>& windows);

bool table_eq(const CoeffTable& a, const CoeffTable& b);

// Coefficient-wise limits ----------------------------------------------------

// Terms carry per-variable N-slopes: a slope vector s means the term is
// multiplied by prod_v v^(s_v * N) with N a formal positive integer.
struct LimitFamily {
    explicit LimitFamily(const VarTable& t) : ctx_(&t) {}
    const VarTable& ctx() const { return *ctx_; }

    std::vector<std::pair<RegularTerm, ExpVec>> regs;
    std::vector<std::pair<DeltaTerm, ExpVec>> dels;

    static LimitFamily from_dist(const DistExpr& d, const ExpVec& slopes);
    LimitFamily operator*(const LimitFamily& o) const; // regular terms only
    LimitFamily operator+(const LimitFamily& o) const;

private:
    const VarTable* ctx_;
};

// N -> infinity in the |q| < 1 regime, coefficientwise.
DistExpr limit(const LimitFamily& fam);

// internals shared with other modules
namespace dist_detail {
RegularTerm reg_one(const VarTable& t);
RegularTerm reg_mul(const VarTable& t, const RegularTerm& a, const RegularTerm& b);
std::vector<RegularTerm> reg_at_support(const VarTable& t, const RegularTerm& r,
                                        VarId pivot, const Monomial& sol);
Monomial solve_support(const VarTable& t, const Monomial& m, VarId pivot);
DeltaTerm normalize_delta_term(const VarTable& t, DeltaTerm d);
bool monomial_is_one(const Monomial& m);
} // namespace dist_detail

} // namespace qcv
