#include "qcv/dist.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace qcv {

namespace {

bool dirs_less(const std::map<Monomial, int, MonomialLess>& a,
               const std::map<Monomial, int, MonomialLess>& b) {
    MonomialLess ml;
    auto ita = a.begin();
    auto itb = b.begin();
    for (; ita != a.end() && itb != b.end(); ++ita, ++itb) {
        if (ml(ita->first, itb->first)) return true;
        if (ml(itb->first, ita->first)) return false;
        if (ita->second != itb->second) return ita->second < itb->second;
    }
    return ita == a.end() && itb != b.end();
}

ExpVec spectral_exps(const VarTable& t, const Monomial& m) {
    ExpVec e(m.exps.size(), 0);
    for (int v = 0; v < t.size(); ++v)
        if (t.is_spectral(v)) e[static_cast<size_t>(v)] = m.exps[static_cast<size_t>(v)];
    return e;
}

bool spectral_free_mono(const VarTable& t, const Monomial& m) {
    for (int v = 0; v < t.size(); ++v)
        if (t.is_spectral(v) && m.exps[static_cast<size_t>(v)] != 0) return false;
    return true;
}

bool spectral_free_poly(const VarTable& t, const LaurentPoly& p) {
    for (int v = 0; v < t.size(); ++v)
        if (t.is_spectral(v) && p.depends_on(v)) return false;
    return true;
}

// lowest spectral variable with nonzero exponent, or -1
VarId lead_spectral(const VarTable& t, const Monomial& m) {
    for (int v = 0; v < t.size(); ++v)
        if (t.is_spectral(v) && m.exps[static_cast<size_t>(v)] != 0) return v;
    return -1;
}

// Canonical binomial key: the lead spectral variable carries a positive
// exponent; flipping M -> 1/M flips the expansion direction.
std::pair<Monomial, int> normalize_mono_dir(const VarTable& t, const Monomial& m,
                                            int dir) {
    VarId v = lead_spectral(t, m);
    if (v >= 0 && m.exps[static_cast<size_t>(v)] < 0) return {m.inverse(), -dir};
    return {m, dir};
}

// stored direction for binomial (1 - c*var) as produced by a pole pivot
int lookup_dir(const VarTable& t, const std::map<Monomial, int, MonomialLess>& dirs,
               const Monomial& M) {
    auto it = dirs.find(M);
    if (it != dirs.end()) return it->second;
    auto inv = M.inverse();
    it = dirs.find(inv);
    if (it != dirs.end()) return -it->second;
    throw NonExpandable("no direction recorded for a denominator binomial");
}

// den = residual(params) * shift * prod (1 - M_i)^{k_i}
struct SpectralFactors {
    LaurentPoly residual;
    Monomial shift;
    std::map<Monomial, int, MonomialLess> factors;
};

SpectralFactors factor_spectral(const VarTable& t, const LaurentPoly& den) {
    SpectralFactors out;
    out.shift = Monomial::one(t);
    LaurentPoly cur = den;
    for (VarId v = 0; v < t.size(); ++v) {
        if (!t.is_spectral(v) || !cur.depends_on(v)) continue;
        VarFactorization vf = factor_in_var(t, cur, v);
        if (vf.vshift != 0) {
            Monomial sh = Monomial::one(t);
            sh.exps[static_cast<size_t>(v)] = vf.vshift;
            out.shift = out.shift * sh;
        }
        for (const auto& [c, mult] : vf.factors)
            out.factors[c * Monomial::var(t, v)] += mult;
        cur = vf.content;
    }
    if (!spectral_free_poly(t, cur))
        throw UnsupportedDenominator("spectral variables left after factoring");
    out.residual = cur;
    return out;
}

// exists lambda with lambda . d >= 1 for every direction d (pointed cone);
// Fourier-Motzkin with back substitution, returns the witness functional.
bool pointed_cone(const std::vector<ExpVec>& dirs, std::vector<BigRat>* witness) {
    if (dirs.empty()) {
        if (witness) witness->clear();
        return true;
    }
    size_t n = dirs[0].size();
    // inequality: sum a_j x_j >= b
    struct Ineq {
        std::vector<BigRat> a;
        BigRat b;
    };
    std::vector<Ineq> sys;
    for (const auto& d : dirs) {
        Ineq q;
        q.a.assign(n, BigRat(0));
        for (size_t j = 0; j < n; ++j) q.a[j] = BigRat(d[j]);
        q.b = 1;
        sys.push_back(std::move(q));
    }
    std::vector<std::vector<Ineq>> layers;
    for (size_t var = 0; var < n; ++var) {
        layers.push_back(sys);
        std::vector<Ineq> pos, neg, zer;
        for (auto& q : sys) {
            if (q.a[var] > 0)
                pos.push_back(q);
            else if (q.a[var] < 0)
                neg.push_back(q);
            else
                zer.push_back(q);
        }
        std::vector<Ineq> next = zer;
        for (const auto& P : pos)
            for (const auto& N : neg) {
                // P: x >= (b_P - rest_P)/a_P ; N: x <= (b_N - rest_N)/a_N
                Ineq q;
                q.a.assign(n, BigRat(0));
                for (size_t j = 0; j < n; ++j)
                    q.a[j] = P.a[j] * (-N.a[var]) + N.a[j] * P.a[var];
                q.b = P.b * (-N.a[var]) + N.b * P.a[var];
                next.push_back(std::move(q));
            }
        sys = std::move(next);
        if (sys.size() > 4096) throw QcvError("pointedness check blow-up");
    }
    for (const auto& q : sys)
        if (q.b > 0) return false; // 0 >= b with b > 0: infeasible
    if (witness) {
        witness->assign(n, BigRat(0));
        for (size_t vi = n; vi-- > 0;) {
            // bounds from layer vi with later variables substituted
            bool has_lo = false;
            BigRat lo(0);
            bool has_hi = false;
            BigRat hi(0);
            for (const auto& q : layers[vi]) {
                if (q.a[vi] == 0) continue;
                BigRat rest = q.b;
                for (size_t j = vi + 1; j < n; ++j) rest -= q.a[j] * (*witness)[j];
                BigRat bound = rest / q.a[vi];
                if (q.a[vi] > 0) {
                    if (!has_lo || bound > lo) lo = bound, has_lo = true;
                } else {
                    if (!has_hi || bound < hi) hi = bound, has_hi = true;
                }
            }
            if (has_lo && has_hi)
                (*witness)[vi] = (lo + hi) / 2;
            else if (has_lo)
                (*witness)[vi] = lo;
            else if (has_hi)
                (*witness)[vi] = hi;
        }
    }
    return true;
}

void check_pointed(const VarTable& t, const std::map<Monomial, int, MonomialLess>& dirs,
                   const std::string& who) {
    std::vector<ExpVec> vecs;
    for (const auto& [M, dir] : dirs) {
        ExpVec e = spectral_exps(t, M);
        for (auto& x : e) x *= dir;
        vecs.push_back(std::move(e));
    }
    if (!pointed_cone(vecs, nullptr))
        throw Divergent("incompatible expansion regions in " + who);
}

LaurentPoly binom_poly(const VarTable& t, const Monomial& M, int k) {
    LaurentPoly b = LaurentPoly::one(t) - LaurentPoly(M);
    LaurentPoly r = LaurentPoly::one(t);
    for (int i = 0; i < k; ++i) r = r * b;
    return r;
}

} // namespace

namespace dist_detail {

bool monomial_is_one(const Monomial& m) {
    if (m.coeff != 1) return false;
    for (auto e : m.exps)
        if (e != 0) return false;
    return true;
}

RegularTerm reg_one(const VarTable& t) { return RegularTerm{RatFun::one(t), {}}; }

RegularTerm reg_mul(const VarTable& t, const RegularTerm& a, const RegularTerm& b) {
    RegularTerm r{a.f * b.f, a.dirs};
    for (const auto& [M, dir] : b.dirs) {
        auto it = r.dirs.find(M);
        if (it == r.dirs.end())
            r.dirs.emplace(M, dir);
        else if (it->second != dir)
            throw Divergent("opposite expansions of (1 - " + M.str(t) + ")");
    }
    check_pointed(t, r.dirs, "a product of regular terms");
    return r;
}

Monomial solve_support(const VarTable& t, const Monomial& m, VarId pivot) {
    std::int64_t e = m.exps[static_cast<size_t>(pivot)];
    if (e == 0) throw QcvError("internal: pivot absent from delta argument");
    Monomial rest = m;
    rest.exps[static_cast<size_t>(pivot)] = 0;
    return rest.pow(-t.denom(pivot), e);
}

// Evaluate r at {pivot = sol}; may split into several terms.
std::vector<RegularTerm> reg_at_support(const VarTable& t, const RegularTerm& r,
                                        VarId pivot, const Monomial& sol) {
    std::vector<RegularTerm> out;
    if (r.f.is_zero()) return out;
    if (!r.f.depends_on(pivot)) {
        out.push_back(r);
        return out;
    }
    PoleNormalForm pnf = pole_normal_form(t, r.f, pivot);
    std::map<Monomial, int, MonomialLess> kept;
    for (const auto& [M, dir] : r.dirs)
        if (M.exps[static_cast<size_t>(pivot)] == 0) kept.emplace(M, dir);

    std::int64_t dv = t.denom(pivot);
    for (const auto& [e, c] : pnf.laurent) {
        Monomial pw = sol.pow(e, dv);
        RegularTerm piece{c * RatFun::from_monomial(t, pw), kept};
        if (!piece.f.is_zero()) out.push_back(std::move(piece));
    }
    for (const auto& [key, num] : pnf.poles) {
        const Monomial& c = key.first;
        int k = key.second;
        Monomial Mv = c * Monomial::var(t, pivot);
        int dir = lookup_dir(t, r.dirs, Mv);
        Monomial S = c * sol;
        if (monomial_is_one(S))
            throw Divergent("pole (1 - " + Mv.str(t) + ")^" + std::to_string(k) +
                            " meets the delta support");
        RegularTerm piece{num, kept};
        if (spectral_free_mono(t, S)) {
            piece.f = piece.f * RatFun(LaurentPoly::one(t), binom_poly(t, S, k));
        } else {
            auto [Sn, dn] = normalize_mono_dir(t, S, dir);
            if (dn != dir) {
                // (1-S)^-k = (-1)^k Sn^k (1-Sn)^-k after the flip
                Monomial adj = Sn.pow(k);
                adj.coeff *= (k % 2 ? BigRat(-1) : BigRat(1));
                piece.f = piece.f * RatFun::from_monomial(t, adj);
            }
            piece.f = piece.f * RatFun(LaurentPoly::one(t), binom_poly(t, Sn, k));
            auto it = piece.dirs.find(Sn);
            if (it == piece.dirs.end())
                piece.dirs.emplace(Sn, dn);
            else if (it->second != dn)
                throw Divergent("conflicting expansion after delta substitution");
            check_pointed(t, piece.dirs, "a delta substitution");
        }
        if (!piece.f.is_zero()) out.push_back(std::move(piece));
    }
    return out;
}

// value of r at {var = 0} (additive delta support)
std::vector<RegularTerm> reg_at_zero(const VarTable& t, const RegularTerm& r, VarId var) {
    std::vector<RegularTerm> out;
    if (r.f.is_zero()) return out;
    if (!r.f.depends_on(var)) {
        out.push_back(r);
        return out;
    }
    PoleNormalForm pnf = pole_normal_form(t, r.f, var);
    std::map<Monomial, int, MonomialLess> kept;
    for (const auto& [M, dir] : r.dirs)
        if (M.exps[static_cast<size_t>(var)] == 0) kept.emplace(M, dir);
    for (const auto& [e, c] : pnf.laurent) {
        if (e > 0) continue;
        if (e < 0)
            throw Divergent("pole at " + t.name(var) + " = 0 meets the delta support");
        out.push_back(RegularTerm{c, kept});
    }
    for (const auto& [key, num] : pnf.poles) {
        // (1 - c*0)^-k = 1
        RegularTerm piece{num, kept};
        if (!piece.f.is_zero()) out.push_back(std::move(piece));
    }
    return out;
}

DeltaTerm normalize_delta_term(const VarTable& t, DeltaTerm d) {
    // pivot selection and positive pivot exponent
    auto set_pivot = [&](DeltaArg& a) {
        VarId best = -1;
        for (int v = 0; v < t.size(); ++v) {
            if (!t.is_spectral(v) || a.m.exps[static_cast<size_t>(v)] == 0) continue;
            if (best < 0 || t.name(v) > t.name(best)) best = v;
        }
        // a spectral-free argument is a bilateral constant sum: divergent
        if (best < 0) throw Divergent("delta argument " + a.m.str(t) +
                                      " has no spectral variable");
        a.pivot = best;
        if (a.m.exps[static_cast<size_t>(best)] < 0) a.m = a.m.inverse();
    };
    for (auto& a : d.margs) set_pivot(a);

    // triangularize: no pivot may appear in another argument
    for (int pass = 0; pass < 16; ++pass) {
        bool changed = false;
        for (size_t i = 0; i < d.margs.size(); ++i) {
            VarId pv = d.margs[i].pivot;
            std::int64_t ei = d.margs[i].m.exps[static_cast<size_t>(pv)];
            for (size_t j = 0; j < d.margs.size(); ++j) {
                if (i == j) continue;
                std::int64_t ej = d.margs[j].m.exps[static_cast<size_t>(pv)];
                if (ej == 0) continue;
                d.margs[j].m = d.margs[j].m * d.margs[i].m.pow(-ej, ei);
                if (spectral_free_mono(t, d.margs[j].m))
                    throw Divergent("dependent delta arguments");
                set_pivot(d.margs[j]);
                changed = true;
            }
        }
        if (!changed) break;
        if (pass == 15) throw QcvError("internal: delta triangularization stuck");
    }
    std::sort(d.margs.begin(), d.margs.end(), [](const DeltaArg& a, const DeltaArg& b) {
        return MonomialLess{}(a.m, b.m);
    });
    std::sort(d.aargs.begin(), d.aargs.end());
    return d;
}

} // namespace dist_detail

using namespace dist_detail;

// --- DistExpr basics --------------------------------------------------------

DistExpr DistExpr::one(const VarTable& t) {
    DistExpr d(t);
    d.regs.push_back(reg_one(t));
    return d;
}

DistExpr DistExpr::from_regular(const VarTable& t, RegularTerm r) {
    DistExpr d(t);
    if (!r.f.is_zero()) d.regs.push_back(std::move(r));
    return d;
}

namespace {

// Eliminate pivots and additive variables from a raw coefficient; a term can
// split into several coefficients (sum), hence the vector.
std::vector<RegularTerm> eliminate_args(const VarTable& t, const DeltaTerm& shape,
                                        const RegularTerm& coeff) {
    std::vector<RegularTerm> cur{coeff};
    for (const auto& a : shape.margs) {
        Monomial sol = solve_support(t, a.m, a.pivot);
        std::vector<RegularTerm> next;
        for (const auto& piece : cur) {
            auto vals = reg_at_support(t, piece, a.pivot, sol);
            next.insert(next.end(), vals.begin(), vals.end());
        }
        cur = std::move(next);
    }
    for (VarId v : shape.aargs) {
        std::vector<RegularTerm> next;
        for (const auto& piece : cur) {
            auto vals = reg_at_zero(t, piece, v);
            next.insert(next.end(), vals.begin(), vals.end());
        }
        cur = std::move(next);
    }
    return cur;
}

void push_delta(DistExpr& out, const VarTable& t, DeltaTerm d) {
    DeltaTerm shape = normalize_delta_term(t, std::move(d));
    auto pieces = eliminate_args(t, shape, shape.coeff);
    for (auto& p : pieces) {
        if (p.f.is_zero()) continue;
        DeltaTerm nt = shape;
        nt.coeff = std::move(p);
        out.dels.push_back(std::move(nt));
    }
}

void compact(DistExpr& d, const VarTable& t) {
    std::vector<RegularTerm> regs;
    for (auto& r : d.regs) {
        bool merged = false;
        for (auto& s : regs) {
            if (!dirs_less(s.dirs, r.dirs) && !dirs_less(r.dirs, s.dirs)) {
                s.f = s.f + r.f;
                merged = true;
                break;
            }
        }
        if (!merged) regs.push_back(std::move(r));
    }
    d.regs.clear();
    for (auto& r : regs)
        if (!r.f.is_zero()) d.regs.push_back(std::move(r));

    std::vector<DeltaTerm> dels;
    auto same_args = [&](const DeltaTerm& a, const DeltaTerm& b) {
        if (a.margs.size() != b.margs.size() || a.aargs != b.aargs) return false;
        for (size_t i = 0; i < a.margs.size(); ++i) {
            MonomialLess ml;
            if (ml(a.margs[i].m, b.margs[i].m) || ml(b.margs[i].m, a.margs[i].m))
                return false;
        }
        return true;
    };
    for (auto& x : d.dels) {
        bool merged = false;
        for (auto& y : dels) {
            if (same_args(x, y) && !dirs_less(x.coeff.dirs, y.coeff.dirs) &&
                !dirs_less(y.coeff.dirs, x.coeff.dirs)) {
                y.coeff.f = y.coeff.f + x.coeff.f;
                merged = true;
                break;
            }
        }
        if (!merged) dels.push_back(std::move(x));
    }
    d.dels.clear();
    for (auto& x : dels)
        if (!x.coeff.f.is_zero()) d.dels.push_back(std::move(x));
    (void)t;
}

} // namespace

DistExpr DistExpr::operator+(const DistExpr& o) const {
    DistExpr r = *this;
    r.regs.insert(r.regs.end(), o.regs.begin(), o.regs.end());
    r.dels.insert(r.dels.end(), o.dels.begin(), o.dels.end());
    compact(r, ctx());
    return r;
}

DistExpr DistExpr::operator-() const {
    DistExpr r = *this;
    for (auto& x : r.regs) x.f = -x.f;
    for (auto& x : r.dels) x.coeff.f = -x.coeff.f;
    return r;
}

DistExpr DistExpr::operator-(const DistExpr& o) const { return *this + (-o); }

DistExpr DistExpr::operator*(const DistExpr& o) const {
    const VarTable& t = ctx();
    DistExpr out(t);
    for (const auto& a : regs)
        for (const auto& b : o.regs) {
            RegularTerm r = reg_mul(t, a, b);
            if (!r.f.is_zero()) out.regs.push_back(std::move(r));
        }
    auto reg_times_delta = [&](const RegularTerm& r, const DeltaTerm& d) {
        std::vector<RegularTerm> vals{r};
        for (const auto& a : d.margs) {
            Monomial sol = solve_support(t, a.m, a.pivot);
            std::vector<RegularTerm> next;
            for (const auto& piece : vals) {
                auto vs = reg_at_support(t, piece, a.pivot, sol);
                next.insert(next.end(), vs.begin(), vs.end());
            }
            vals = std::move(next);
        }
        for (VarId v : d.aargs) {
            std::vector<RegularTerm> next;
            for (const auto& piece : vals) {
                auto vs = reg_at_zero(t, piece, v);
                next.insert(next.end(), vs.begin(), vs.end());
            }
            vals = std::move(next);
        }
        for (const auto& piece : vals) {
            DeltaTerm nt = d;
            nt.coeff = reg_mul(t, d.coeff, piece);
            if (!nt.coeff.f.is_zero()) out.dels.push_back(std::move(nt));
        }
    };
    for (const auto& a : regs)
        for (const auto& b : o.dels) reg_times_delta(a, b);
    for (const auto& b : o.regs)
        for (const auto& a : dels) reg_times_delta(b, a);

    for (const auto& a : dels)
        for (const auto& b : o.dels) {
            // joint independence of the multiplicative supports
            std::vector<ExpVec> vecs;
            for (const auto& x : a.margs) vecs.push_back(spectral_exps(t, x.m));
            for (const auto& x : b.margs) vecs.push_back(spectral_exps(t, x.m));
            size_t nv = vecs.empty() ? 0 : vecs[0].size();
            std::vector<std::vector<BigRat>> rows;
            for (auto& v : vecs) {
                std::vector<BigRat> row(nv);
                for (size_t j = 0; j < nv; ++j) row[j] = BigRat(v[j]);
                rows.push_back(std::move(row));
            }
            size_t rank = 0;
            for (size_t col = 0; col < nv && rank < rows.size(); ++col) {
                size_t piv = rank;
                while (piv < rows.size() && rows[piv][col] == 0) ++piv;
                if (piv == rows.size()) continue;
                std::swap(rows[rank], rows[piv]);
                for (size_t i = 0; i < rows.size(); ++i) {
                    if (i == rank || rows[i][col] == 0) continue;
                    BigRat f = rows[i][col] / rows[rank][col];
                    for (size_t j = 0; j < nv; ++j) rows[i][j] -= f * rows[rank][j];
                }
                ++rank;
            }
            if (rank < vecs.size())
                throw Divergent("dependent delta arguments in a product");
            for (VarId v : a.aargs) {
                if (std::find(b.aargs.begin(), b.aargs.end(), v) != b.aargs.end())
                    throw Divergent("square of an additive delta");
            }
            DeltaTerm nt{{}, {}, reg_one(t)};
            nt.margs = a.margs;
            nt.margs.insert(nt.margs.end(), b.margs.begin(), b.margs.end());
            nt.aargs = a.aargs;
            nt.aargs.insert(nt.aargs.end(), b.aargs.begin(), b.aargs.end());
            nt.coeff = reg_mul(t, a.coeff, b.coeff);
            push_delta(out, t, std::move(nt));
        }
    compact(out, t);
    return out;
}

// --- constructors -----------------------------------------------------------

DistExpr dist_from_ratfun(const VarTable& t, const RatFun& f,
                          const std::map<VarId, Region>& tags) {
    if (f.is_zero()) return DistExpr::zero(t);
    SpectralFactors fac = factor_spectral(t, f.den());
    RegularTerm r{f, {}};
    for (const auto& [M, mult] : fac.factors) {
        int vote = 0;
        for (int v = 0; v < t.size(); ++v) {
            std::int64_t e = M.exps[static_cast<size_t>(v)];
            if (e == 0 || !t.is_spectral(v)) continue;
            auto it = tags.find(v);
            if (it == tags.end()) continue;
            int s = (e > 0) ? 1 : -1;
            if (it->second == Region::Infinity) s = -s;
            if (vote == 0)
                vote = s;
            else if (vote != s)
                throw NonExpandable("conflicting regions for (1 - " + M.str(t) + ")");
        }
        if (vote == 0)
            throw NonExpandable("no region tag covers (1 - " + M.str(t) + ")");
        r.dirs.emplace(M, vote);
    }
    return DistExpr::from_regular(t, std::move(r));
}

DistExpr dist_delta(const VarTable& t, const Monomial& m) {
    if (lead_spectral(t, m) < 0)
        throw QcvError("delta argument must involve a spectral variable");
    DistExpr d(t);
    DeltaTerm dt{{}, {}, reg_one(t)};
    dt.margs.push_back(DeltaArg{m, -1});
    dt.coeff = reg_one(t);
    push_delta(d, t, std::move(dt));
    return d;
}

DistExpr dist_delta_add(const VarTable& t, VarId v) {
    if (!t.is_spectral(v)) throw QcvError("additive delta needs a spectral variable");
    DistExpr d(t);
    DeltaTerm dt{{}, {}, reg_one(t)};
    dt.aargs.push_back(v);
    dt.coeff = reg_one(t);
    d.dels.push_back(std::move(dt));
    return d;
}

DistExpr dist_scale(const DistExpr& d, const RatFun& c) {
    const VarTable& t = d.ctx();
    if (c.is_zero()) return DistExpr::zero(t);
    if (!factor_spectral(t, c.den()).factors.empty())
        throw QcvError("dist_scale with a spectral pole; use a full product");
    return d * DistExpr::from_regular(t, RegularTerm{c, {}});
}

// --- canonical form ---------------------------------------------------------

namespace {

struct Atom {
    ExpVec lexp;
    std::vector<std::tuple<Monomial, int, int>> poles; // (M, mult, dir)
    RatFun coeff;
};

struct AtomKey {
    ExpVec lexp;
    std::vector<std::tuple<Monomial, int, int>> poles;

    bool operator<(const AtomKey& o) const {
        if (lexp != o.lexp) return exp_less(lexp, o.lexp);
        if (poles.size() != o.poles.size()) return poles.size() < o.poles.size();
        MonomialLess ml;
        for (size_t i = 0; i < poles.size(); ++i) {
            const auto& [m1, k1, d1] = poles[i];
            const auto& [m2, k2, d2] = o.poles[i];
            if (ml(m1, m2)) return true;
            if (ml(m2, m1)) return false;
            if (k1 != k2) return k1 < k2;
            if (d1 != d2) return d1 < d2;
        }
        return false;
    }
};

std::vector<Atom> atomize(const VarTable& t, const RegularTerm& term) {
    std::vector<Atom> work{
        Atom{ExpVec(static_cast<size_t>(t.size()), 0), {}, term.f}};
    for (VarId v = 0; v < t.size(); ++v) {
        if (!t.is_spectral(v)) continue;
        std::vector<Atom> next;
        for (auto& a : work) {
            if (!a.coeff.depends_on(v)) {
                next.push_back(std::move(a));
                continue;
            }
            PoleNormalForm pnf = pole_normal_form(t, a.coeff, v);
            for (const auto& [e, c] : pnf.laurent) {
                Atom b = a;
                b.lexp[static_cast<size_t>(v)] += e;
                b.coeff = c;
                next.push_back(std::move(b));
            }
            for (const auto& [key, num] : pnf.poles) {
                Atom b = a;
                Monomial M = key.first * Monomial::var(t, v);
                int dir = lookup_dir(t, term.dirs, M);
                b.poles.emplace_back(M, key.second, dir);
                b.coeff = num;
                next.push_back(std::move(b));
            }
        }
        work = std::move(next);
    }
    for (auto& a : work) {
        std::sort(a.poles.begin(), a.poles.end(),
                  [](const auto& x, const auto& y) {
                      MonomialLess ml;
                      const auto& [m1, k1, d1] = x;
                      const auto& [m2, k2, d2] = y;
                      if (ml(m1, m2)) return true;
                      if (ml(m2, m1)) return false;
                      return k1 < k2;
                  });
        if (!spectral_free_poly(t, a.coeff.num()) ||
            !spectral_free_poly(t, a.coeff.den()))
            throw QcvError("internal: atom coefficient still spectral");
    }
    return work;
}

struct DeltaKey {
    std::vector<Monomial> margs;
    std::vector<VarId> aargs;

    bool operator<(const DeltaKey& o) const {
        if (margs.size() != o.margs.size()) return margs.size() < o.margs.size();
        MonomialLess ml;
        for (size_t i = 0; i < margs.size(); ++i) {
            if (ml(margs[i], o.margs[i])) return true;
            if (ml(o.margs[i], margs[i])) return false;
        }
        return aargs < o.aargs;
    }
};

struct Canonical {
    std::map<AtomKey, RatFun> reg;
    std::map<DeltaKey, std::map<AtomKey, RatFun>> del;
};

void add_atom(std::map<AtomKey, RatFun>& into, Atom a) {
    AtomKey key{std::move(a.lexp), std::move(a.poles)};
    auto it = into.find(key);
    if (it == into.end())
        into.emplace(std::move(key), std::move(a.coeff));
    else
        it->second = it->second + a.coeff;
}

RegularTerm atom_to_regular(const VarTable& t, const Atom& a, bool negate) {
    Monomial lm(negate ? BigRat(-1) : BigRat(1), a.lexp);
    LaurentPoly den = LaurentPoly::one(t);
    RegularTerm r{a.coeff * RatFun::from_monomial(t, lm), {}};
    for (const auto& [M, k, dir] : a.poles) {
        den = den * binom_poly(t, M, k);
        r.dirs.emplace(M, dir);
    }
    r.f = r.f * RatFun(LaurentPoly::one(t), den);
    return r;
}

// Canonical basis uses direction +1 for simple poles:
//   iota_-(r/(1-M)) = iota_+(r/(1-M)) - r delta(M).
void insert_canonical(Canonical& c, const VarTable& t,
                      const std::vector<DeltaArg>& margs, const std::vector<VarId>& aargs,
                      const Atom& atom) {
    if (atom.coeff.is_zero()) return;
    size_t hit = atom.poles.size();
    for (size_t i = 0; i < atom.poles.size(); ++i) {
        const auto& [M, k, dir] = atom.poles[i];
        if (k == 1 && dir < 0) {
            hit = i;
            break;
        }
    }
    if (hit == atom.poles.size()) {
        if (margs.empty() && aargs.empty()) {
            add_atom(c.reg, atom);
            return;
        }
        DeltaKey key;
        for (const auto& a : margs) key.margs.push_back(a.m);
        key.aargs = aargs;
        add_atom(c.del[key], atom);
        return;
    }
    Atom flipped = atom;
    std::get<2>(flipped.poles[hit]) = 1;
    insert_canonical(c, t, margs, aargs, flipped);

    Atom rest = atom;
    Monomial M = std::get<0>(rest.poles[hit]);
    rest.poles.erase(rest.poles.begin() + static_cast<std::ptrdiff_t>(hit));
    DeltaTerm dt{margs, aargs, atom_to_regular(t, rest, /*negate=*/true)};
    dt.margs.push_back(DeltaArg{M, -1});
    DistExpr tmp(t);
    push_delta(tmp, t, std::move(dt));
    for (const auto& x : tmp.dels)
        for (const auto& a2 : atomize(t, x.coeff))
            insert_canonical(c, t, x.margs, x.aargs, a2);
}

Canonical canonicalize(const DistExpr& d) {
    const VarTable& t = d.ctx();
    Canonical c;
    for (const auto& r : d.regs)
        for (const auto& a : atomize(t, r)) insert_canonical(c, t, {}, {}, a);
    for (const auto& x : d.dels)
        for (const auto& a : atomize(t, x.coeff))
            insert_canonical(c, t, x.margs, x.aargs, a);
    for (auto it = c.reg.begin(); it != c.reg.end();)
        it = it->second.is_zero() ? c.reg.erase(it) : std::next(it);
    for (auto it = c.del.begin(); it != c.del.end();) {
        for (auto jt = it->second.begin(); jt != it->second.end();)
            jt = jt->second.is_zero() ? it->second.erase(jt) : std::next(jt);
        it = it->second.empty() ? c.del.erase(it) : std::next(it);
    }
    return c;
}

} // namespace

bool dist_is_zero(const DistExpr& a) {
    if (a.structurally_zero()) return true;
    Canonical c = canonicalize(a);
    return c.reg.empty() && c.del.empty();
}

bool dist_eq(const DistExpr& a, const DistExpr& b) { return dist_is_zero(a - b); }

// --- substitution -----------------------------------------------------------

namespace {

RegularTerm subst_regular(const VarTable& t, const RegularTerm& r, VarId v,
                          const Monomial& target) {
    RegularTerm out{rf_substitute(t, r.f, v, target), {}};
    for (const auto& [M, dir] : r.dirs) {
        Monomial M2 = M;
        std::int64_t e = M.exps[static_cast<size_t>(v)];
        if (e != 0) {
            M2.exps[static_cast<size_t>(v)] = 0;
            M2 = M2 * target.pow(e, t.denom(v));
        }
        if (spectral_free_mono(t, M2)) continue; // factor became a parameter
        auto [Mn, dn] = normalize_mono_dir(t, M2, dir);
        auto it = out.dirs.find(Mn);
        if (it == out.dirs.end())
            out.dirs.emplace(Mn, dn);
        else if (it->second != dn)
            throw Divergent("substitution folds opposite regions together");
    }
    check_pointed(t, out.dirs, "a substitution");
    return out;
}

} // namespace

DistExpr dist_substitute(const DistExpr& d, VarId v, const Monomial& target) {
    const VarTable& t = d.ctx();
    DistExpr out(t);
    for (const auto& r : d.regs) {
        RegularTerm nr = subst_regular(t, r, v, target);
        if (!nr.f.is_zero()) out.regs.push_back(std::move(nr));
    }
    for (const auto& x : d.dels) {
        DeltaTerm nt{{}, {}, reg_one(t)};
        for (const auto& a : x.margs) {
            DeltaArg na;
            na.m = a.m;
            std::int64_t e = a.m.exps[static_cast<size_t>(v)];
            if (e != 0) {
                na.m.exps[static_cast<size_t>(v)] = 0;
                na.m = na.m * target.pow(e, t.denom(v));
            }
            nt.margs.push_back(std::move(na));
        }
        for (VarId u : x.aargs) {
            if (u == v) throw Unsupported("substitution into an additive delta");
            nt.aargs.push_back(u);
        }
        nt.coeff = subst_regular(t, x.coeff, v, target);
        push_delta(out, t, std::move(nt));
    }
    compact(out, t);
    return out;
}

DistExpr dist_inverse(const DistExpr& d, const std::map<VarId, Region>& tags) {
    const VarTable& t = d.ctx();
    if (!d.dels.empty() || d.regs.size() != 1)
        throw SingularPivot("entry is not a single regular term");
    const RegularTerm& r = d.regs[0];
    if (r.f.is_zero()) throw SingularPivot("zero entry");
    try {
        return dist_from_ratfun(t, r.f.inverse(), tags);
    } catch (const NonExpandable& e) {
        throw SingularPivot(std::string("reciprocal not expandable: ") + e.what());
    } catch (const UnsupportedDenominator& e) {
        throw SingularPivot(std::string("reciprocal not binomial: ") + e.what());
    }
}

std::string dist_str(const DistExpr& d) {
    const VarTable& t = d.ctx();
    if (d.structurally_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    auto emit_reg = [&](const RegularTerm& r) {
        if (!first) os << " + ";
        first = false;
        os << "iota[";
        bool f2 = true;
        for (const auto& [M, dir] : r.dirs) {
            if (!f2) os << ", ";
            f2 = false;
            os << M.str(t) << (dir > 0 ? "->0" : "->inf");
        }
        os << "](" << r.f.str(t) << ")";
    };
    for (const auto& r : d.regs) emit_reg(r);
    for (const auto& x : d.dels) {
        if (!first) os << " + ";
        first = false;
        for (const auto& a : x.margs) os << "delta(" << a.m.str(t) << ")";
        for (VarId v : x.aargs) os << "delta_0(" << t.name(v) << ")";
        os << "*[" << x.coeff.f.str(t) << "]";
    }
    return os.str();
}

// --- truncation oracle -------------------------------------------------------

namespace {

BigRat binom_coeff(std::int64_t j, int k) {
    // C(j+k-1, k-1)
    BigRat r(1);
    for (int i = 1; i < k; ++i) r = r * BigRat(j + i) / BigRat(i);
    return r;
}

void enumerate_atom(const VarTable& t, const Atom& atom,
                    const std::map<VarId, Window>& windows, const ExpVec& base_shift,
                    const RatFun& scale, std::map<ExpVec, RatFun>& into) {
    // base exponents
    ExpVec base = atom.lexp;
    for (size_t i = 0; i < base.size(); ++i) base[i] += base_shift[i];

    struct Inst {
        ExpVec step;     // spectral exponent step per series index
        Monomial mono;   // full monomial M (params included)
        int k;
        int dir;
    };
    std::vector<Inst> insts;
    std::vector<ExpVec> dirvecs;
    for (const auto& [M, k, dir] : atom.poles) {
        Inst ins;
        ins.mono = M;
        ins.k = k;
        ins.dir = dir;
        ins.step = spectral_exps(t, M);
        for (auto& x : ins.step) x *= dir;
        insts.push_back(ins);
        dirvecs.push_back(insts.back().step);
    }
    std::vector<BigRat> lambda;
    if (!pointed_cone(dirvecs, &lambda))
        throw Divergent("unpointed directions in truncation");

    // dir = -1 contributes exponents -(k+j)*exps(M): fold the -k*exps(M)
    // offset into the start point, leaving j steps of the direction vector
    ExpVec start = base;
    for (const auto& ins : insts) {
        if (ins.dir < 0) {
            ExpVec me = spectral_exps(t, ins.mono);
            for (size_t i = 0; i < start.size(); ++i)
                start[i] -= static_cast<std::int64_t>(ins.k) * me[i];
        }
    }

    // series depth bound: max over box corners of lambda . (corner - start)
    BigRat bound(0);
    if (!insts.empty()) {
        BigRat acc(0);
        for (int v = 0; v < t.size(); ++v) {
            if (!t.is_spectral(v)) continue;
            BigRat lam(0);
            // lambda is indexed over full exp vectors
            lam = lambda.empty() ? BigRat(0) : lambda[static_cast<size_t>(v)];
            auto it = windows.find(v);
            std::int64_t wlo = it == windows.end() ? 0 : it->second.lo;
            std::int64_t whi = it == windows.end() ? 0 : it->second.hi;
            BigRat c1 = lam * BigRat(wlo - start[static_cast<size_t>(v)]);
            BigRat c2 = lam * BigRat(whi - start[static_cast<size_t>(v)]);
            acc += c1 > c2 ? c1 : c2;
        }
        bound = acc;
    }
    std::int64_t B = 0;
    if (bound > 0) {
        BigInt num = boost::multiprecision::numerator(bound);
        BigInt den = boost::multiprecision::denominator(bound);
        B = static_cast<std::int64_t>(num / den) + 1;
    }

    // windows must cover every spectral variable the atom touches
    auto in_box = [&](const ExpVec& e) {
        for (int v = 0; v < t.size(); ++v) {
            if (!t.is_spectral(v)) continue;
            auto it = windows.find(v);
            std::int64_t lo = it == windows.end() ? 0 : it->second.lo;
            std::int64_t hi = it == windows.end() ? 0 : it->second.hi;
            std::int64_t x = e[static_cast<size_t>(v)];
            if (x < lo || x > hi) return false;
        }
        return true;
    };

    // depth-first over series indices
    std::function<void(size_t, ExpVec, RatFun, std::int64_t)> rec =
        [&](size_t idx, ExpVec e, RatFun c, std::int64_t left) {
            if (idx == insts.size()) {
                if (!in_box(e) || c.is_zero()) return;
                ExpVec key(e.size(), 0);
                for (int v = 0; v < t.size(); ++v)
                    if (t.is_spectral(v))
                        key[static_cast<size_t>(v)] = e[static_cast<size_t>(v)];
                auto it = into.find(key);
                if (it == into.end())
                    into.emplace(std::move(key), c);
                else
                    it->second = it->second + c;
                return;
            }
            const Inst& ins = insts[idx];
            ExpVec me = spectral_exps(t, ins.mono);
            Monomial par = ins.mono; // parameter part of M
            for (int v = 0; v < t.size(); ++v)
                if (t.is_spectral(v)) par.exps[static_cast<size_t>(v)] = 0;
            for (std::int64_t j = 0; j <= left; ++j) {
                ExpVec e2 = e;
                for (size_t i = 0; i < e2.size(); ++i)
                    e2[i] += j * (ins.dir > 0 ? me[i] : -me[i]);
                // coefficient: binom * sign * param-part^(exponent of M used)
                std::int64_t mexp = ins.dir > 0 ? j : -(ins.k + j);
                Monomial pm = par.pow(mexp);
                BigRat bc = binom_coeff(j, ins.k);
                if (ins.dir < 0 && (ins.k % 2)) bc = -bc;
                pm.coeff *= bc;
                RatFun c2 = c * RatFun::from_monomial(t, pm);
                rec(idx + 1, std::move(e2), std::move(c2), left - j);
            }
        };
    ExpVec e0 = start;
    RatFun c0 = scale * atom.coeff;
    rec(0, e0, c0, B);
}

} // namespace

CoeffTable truncate(const DistExpr& d, const std::map<VarId, Window>& windows) {
    const VarTable& t = d.ctx();
    CoeffTable table;
    ExpVec zero_shift(static_cast<size_t>(t.size()), 0);
    for (const auto& r : d.regs)
        for (const auto& atom : atomize(t, r))
            enumerate_atom(t, atom, windows, zero_shift, RatFun::one(t), table.coeffs);

    for (const auto& x : d.dels) {
        if (!x.aargs.empty()) throw Unsupported("truncation of additive deltas");
        // enumerate the delta lattice through the pivots
        std::function<void(size_t, ExpVec, RatFun)> rec = [&](size_t idx, ExpVec shift,
                                                              RatFun c) {
            if (idx == x.margs.size()) {
                for (const auto& atom : atomize(t, x.coeff))
                    enumerate_atom(t, atom, windows, shift, c, table.coeffs);
                return;
            }
            const DeltaArg& a = x.margs[idx];
            ExpVec me = spectral_exps(t, a.m);
            std::int64_t ep = me[static_cast<size_t>(a.pivot)];
            auto itw = windows.find(a.pivot);
            if (itw == windows.end()) throw Unsupported("delta pivot not windowed");
            // ep > 0 by normalization; coefficient of the coeff part is pivot-free
            std::int64_t slo = itw->second.lo, shi = itw->second.hi;
            auto floor_div = [](std::int64_t aa, std::int64_t bb) {
                std::int64_t qq = aa / bb, rr = aa % bb;
                return (rr != 0 && ((rr < 0) != (bb < 0))) ? qq - 1 : qq;
            };
            auto ceil_div = [&](std::int64_t aa, std::int64_t bb) {
                return -floor_div(-aa, bb);
            };
            std::int64_t smin = ceil_div(slo, ep), smax = floor_div(shi, ep);
            for (std::int64_t s = smin; s <= smax; ++s) {
                ExpVec sh = shift;
                for (size_t i = 0; i < sh.size(); ++i) sh[i] += s * me[i];
                Monomial par = a.m;
                for (int v = 0; v < t.size(); ++v)
                    if (t.is_spectral(v)) par.exps[static_cast<size_t>(v)] = 0;
                Monomial pm = par.pow(s);
                rec(idx + 1, std::move(sh), c * RatFun::from_monomial(t, pm));
            }
        };
        rec(0, zero_shift, RatFun::one(t));
    }
    for (auto it = table.coeffs.begin(); it != table.coeffs.end();)
        it = it->second.is_zero() ? table.coeffs.erase(it) : std::next(it);
    return table;
}

bool table_eq(const CoeffTable& a, const CoeffTable& b) {
    for (const auto& [k, v] : a.coeffs) {
        auto it = b.coeffs.find(k);
        if (it == b.coeffs.end()) {
            if (!v.is_zero()) return false;
        } else if (!rf_eq(v, it->second)) {
            return false;
        }
    }
    for (const auto& [k, v] : b.coeffs)
        if (a.coeffs.find(k) == a.coeffs.end() && !v.is_zero()) return false;
    return true;
}

// --- limits -------------------------------------------------------------------

LimitFamily LimitFamily::from_dist(const DistExpr& d, const ExpVec& slopes) {
    LimitFamily f(d.ctx());
    for (const auto& r : d.regs) f.regs.emplace_back(r, slopes);
    for (const auto& x : d.dels) f.dels.emplace_back(x, slopes);
    return f;
}

LimitFamily LimitFamily::operator+(const LimitFamily& o) const {
    LimitFamily f = *this;
    f.regs.insert(f.regs.end(), o.regs.begin(), o.regs.end());
    f.dels.insert(f.dels.end(), o.dels.begin(), o.dels.end());
    return f;
}

LimitFamily LimitFamily::operator*(const LimitFamily& o) const {
    const VarTable& t = ctx();
    if (!dels.empty() || !o.dels.empty())
        throw Unsupported("family products with delta terms");
    LimitFamily f(t);
    for (const auto& [ra, sa] : regs)
        for (const auto& [rb, sb] : o.regs) {
            ExpVec s = sa;
            for (size_t i = 0; i < s.size(); ++i) s[i] += sb[i];
            f.regs.emplace_back(reg_mul(t, ra, rb), s);
        }
    return f;
}

DistExpr limit(const LimitFamily& fam) {
    const VarTable& t = fam.ctx();
    auto qv = t.find("q");
    DistExpr out(t);

    auto qdegree = [&](const Monomial& m) -> std::int64_t {
        if (!qv) return 0;
        return m.exps[static_cast<size_t>(*qv)];
    };
    auto param_only_nontrivial = [&](const Monomial& m) {
        // nonzero exponent on some parameter other than q, or rational != 1
        for (int v = 0; v < t.size(); ++v) {
            if (qv && v == *qv) continue;
            if (!t.is_spectral(v) && m.exps[static_cast<size_t>(v)] != 0) return true;
        }
        return m.coeff != 1;
    };

    for (const auto& [r, slopes] : fam.regs) {
        int nslopes = 0;
        VarId sv = -1;
        for (int v = 0; v < t.size(); ++v)
            if (slopes[static_cast<size_t>(v)] != 0) {
                ++nslopes;
                sv = v;
            }
        if (nslopes == 0) {
            out = out + DistExpr::from_regular(t, r);
            continue;
        }
        if (nslopes > 1) throw Unsupported("limit with several sloped variables");
        std::int64_t s = slopes[static_cast<size_t>(sv)];

        PoleNormalForm pnf = pole_normal_form(t, r.f, sv);
        // laurent pieces vanish coefficientwise for any nonzero slope
        std::map<Monomial, int, MonomialLess> kept;
        for (const auto& [M, dir] : r.dirs)
            if (M.exps[static_cast<size_t>(sv)] == 0) kept.emplace(M, dir);
        for (const auto& [key, num] : pnf.poles) {
            const Monomial& c = key.first;
            int k = key.second;
            Monomial Mv = c * Monomial::var(t, sv);
            int dir = lookup_dir(t, r.dirs, Mv);
            bool c_spectral = !spectral_free_mono(t, c);
            if (dir > 0) {
                if (s > 0) continue; // escapes upward
                if (c_spectral) continue;
                std::int64_t dq = qdegree(c);
                if (dq > 0) continue;
                if (dq < 0)
                    throw Divergent("limit meets growing coefficients at (1 - " +
                                    Mv.str(t) + ")");
                if (param_only_nontrivial(c))
                    throw Unsupported("pole coefficient of modulus one: " + c.str(t));
                if (k > 1) throw Divergent("higher-order pole at the limit support");
                DeltaTerm dt{{}, {}, reg_one(t)};
                dt.margs.push_back(DeltaArg{Monomial::var(t, sv), sv});
                dt.coeff = RegularTerm{num, kept};
                push_delta(out, t, std::move(dt));
            } else {
                if (s < 0) continue;
                if (c_spectral) continue;
                std::int64_t dq = qdegree(c);
                if (dq > 0)
                    throw Divergent("limit meets growing coefficients at (1 - " +
                                    Mv.str(t) + ")");
                if (dq < 0) continue;
                if (param_only_nontrivial(c))
                    throw Unsupported("pole coefficient of modulus one: " + c.str(t));
                if (k > 1) throw Divergent("higher-order pole at the limit support");
                DeltaTerm dt{{}, {}, reg_one(t)};
                dt.margs.push_back(DeltaArg{Monomial::var(t, sv), sv});
                RegularTerm coeff{-num, kept};
                dt.coeff = std::move(coeff);
                push_delta(out, t, std::move(dt));
            }
        }
    }
    for (const auto& [x, slopes] : fam.dels) {
        bool sloped = false;
        for (auto v : slopes)
            if (v != 0) sloped = true;
        if (sloped) throw Unsupported("sloped delta family");
        DistExpr one_term(t);
        one_term.dels.push_back(x);
        out = out + one_term;
    }
    compact(out, t);
    return out;
}

} // namespace qcv
