#pragma once

#include <map>
#include <set>
#include <utility>
#include <vector>

#include "qcv/ratfun.hpp"

namespace qcv {

struct MonomialLess {
    bool operator()(const Monomial& a, const Monomial& b) const {
        if (a.exps != b.exps) return exp_less(a.exps, b.exps);
        return a.coeff < b.coeff;
    }
};

struct PoleKeyLess {
    bool operator()(const std::pair<Monomial, int>& a,
                    const std::pair<Monomial, int>& b) const {
        MonomialLess ml;
        if (ml(a.first, b.first)) return true;
        if (ml(b.first, a.first)) return false;
        return a.second < b.second;
    }
};

// den = unit * v^vshift * prod_i (1 - c_i v)^{mult_i}, c_i monomials free of v.
struct BinomialFactorization {
    Monomial unit;
    std::int64_t vshift = 0; // in scaled units of v
    std::map<Monomial, int, MonomialLess> factors;
};

namespace detail {

// Divide p (dense v-polynomial coefficients) by (1 - c v) if exact.
inline bool div_binomial(std::vector<LaurentPoly>& p, const Monomial& c) {
    if (p.size() < 2) return false;
    std::vector<LaurentPoly> s(p.size() - 1);
    s[0] = p[0];
    for (size_t j = 1; j + 1 < p.size(); ++j) s[j] = p[j] + s[j - 1].mul_monomial(c);
    LaurentPoly rem = p.back() + s.back().mul_monomial(c);
    if (!rem.is_zero()) return false;
    p = std::move(s);
    return true;
}

} // namespace detail

// Factor `den` in variable v as a monomial times a product of binomials
// (1 - c v).  Throws UnsupportedDenominator when no such factorization exists.
inline BinomialFactorization factor_binomials(const VarTable& t, const LaurentPoly& den,
                                              VarId v) {
    if (den.is_zero()) throw DivisionByZero();
    BinomialFactorization out;
    auto by = den.by_var(v);
    std::int64_t dv = t.denom(v);
    for (const auto& [e, c] : by)
        if (e % dv != 0)
            throw UnsupportedDenominator("fractional power of " + t.name(v));
    std::int64_t kmin = by.begin()->first / dv;
    std::int64_t kmax = by.rbegin()->first / dv;
    out.vshift = kmin * dv;

    size_t D = static_cast<size_t>(kmax - kmin);
    std::vector<LaurentPoly> p(D + 1);
    for (const auto& [e, c] : by) p[static_cast<size_t>(e / dv - kmin)] = c;

    if (!p[0].is_monomial())
        throw UnsupportedDenominator("constant term is not a monomial");
    out.unit = p[0].as_monomial();
    Monomial inv = out.unit.inverse();
    for (auto& c : p) c = c.mul_monomial(inv);
    if (D == 0) return out;

    // Candidate roots: -m_a/m_b from monomial pairs of adjacent coefficients,
    // plus -m/d from the linear coefficient (repeated roots of multiplicity d
    // merge into a single monomial there).
    std::set<Monomial, MonomialLess> cands;
    for (size_t k = 1; k < p.size(); ++k)
        for (const auto& ma : p[k].terms())
            for (const auto& mb : p[k - 1].terms()) {
                Monomial c = ma * mb.inverse();
                c.coeff = -c.coeff;
                if (c.coeff != 0) cands.insert(c);
            }
    for (const auto& m : p[1].terms())
        for (size_t d = 1; d <= D; ++d) {
            Monomial c = m;
            c.coeff = -c.coeff / static_cast<int>(d);
            if (c.coeff != 0) cands.insert(c);
        }

    while (p.size() > 1) {
        bool found = false;
        for (const auto& c : cands) {
            if (detail::div_binomial(p, c)) {
                out.factors[c] += 1;
                found = true;
                break;
            }
        }
        if (!found)
            throw UnsupportedDenominator("no binomial divisor at degree " +
                                         std::to_string(p.size() - 1));
    }
    if (!p[0].is_one())
        throw UnsupportedDenominator("residual factor after binomial extraction");
    return out;
}

// den = content(other vars) * v^vshift * prod_i (1 - c_i v)^{mult_i}; unlike
// factor_binomials, the v-free content may be any Laurent polynomial.
struct VarFactorization {
    LaurentPoly content;
    std::int64_t vshift = 0;
    std::map<Monomial, int, MonomialLess> factors;
};

inline VarFactorization factor_in_var(const VarTable& t, const LaurentPoly& den,
                                      VarId v) {
    if (den.is_zero()) throw DivisionByZero();
    VarFactorization out;
    std::int64_t dv = t.denom(v);
    LaurentPoly cur = den;
    out.vshift = cur.min_exps()[static_cast<size_t>(v)];
    if (out.vshift != 0) {
        Monomial sh = Monomial::one(t);
        sh.exps[static_cast<size_t>(v)] = out.vshift;
        cur = cur.mul_monomial(sh.inverse());
    }
    while (cur.depends_on(v)) {
        auto by = cur.by_var(v);
        for (const auto& [e, c] : by)
            if (e % dv != 0)
                throw UnsupportedDenominator("fractional power of " + t.name(v));
        std::int64_t D = by.rbegin()->first / dv;
        std::vector<LaurentPoly> p(static_cast<size_t>(D) + 1);
        for (const auto& [e, c] : by) p[static_cast<size_t>(e / dv)] = c;

        std::set<Monomial, MonomialLess> cands;
        for (size_t k = 1; k < p.size(); ++k)
            for (const auto& ma : p[k].terms())
                for (const auto& mb : p[k - 1].terms()) {
                    Monomial c = ma * mb.inverse();
                    c.coeff = -c.coeff;
                    if (c.coeff != 0) cands.insert(c);
                }
        // merged repeated roots hide behind a multiplicity in the linear term
        for (const auto& ma : p[1].terms())
            for (const auto& mb : p[0].terms())
                for (std::int64_t dd = 1; dd <= D; ++dd) {
                    Monomial c = ma * mb.inverse();
                    c.coeff = -c.coeff / dd;
                    if (c.coeff != 0) cands.insert(c);
                }
        bool found = false;
        for (const auto& c : cands) {
            if (c.exps[static_cast<size_t>(v)] != 0) continue;
            if (detail::div_binomial(p, c)) {
                out.factors[c] += 1;
                LaurentPoly nc;
                Monomial pw = Monomial::one(t);
                Monomial vstep = Monomial::var(t, v);
                for (size_t k = 0; k < p.size(); ++k) {
                    nc = nc + p[k].mul_monomial(pw);
                    pw = pw * vstep;
                }
                cur = nc;
                found = true;
                break;
            }
        }
        if (!found)
            throw UnsupportedDenominator("irreducible factor in " + t.name(v));
    }
    out.content = cur;
    return out;
}

// f = sum_k laurent[k] v^(k/denom) + sum_{(c,k)} poles[(c,k)] / (1 - c v)^k,
// all coefficient RatFuns free of v.
struct PoleNormalForm {
    std::map<std::int64_t, RatFun> laurent; // keyed by scaled v-exponent
    std::map<std::pair<Monomial, int>, RatFun, PoleKeyLess> poles;

    void add_laurent(std::int64_t e, const RatFun& r) {
        auto it = laurent.find(e);
        if (it == laurent.end())
            laurent.emplace(e, r);
        else
            it->second = it->second + r;
    }
    void add_pole(const Monomial& c, int k, const RatFun& r) {
        auto key = std::make_pair(c, k);
        auto it = poles.find(key);
        if (it == poles.end())
            poles.emplace(key, r);
        else
            it->second = it->second + r;
    }
    void prune() {
        for (auto it = laurent.begin(); it != laurent.end();)
            it = it->second.is_zero() ? laurent.erase(it) : std::next(it);
        for (auto it = poles.begin(); it != poles.end();)
            it = it->second.is_zero() ? poles.erase(it) : std::next(it);
    }
};

namespace detail {

// Distribute v^sigma * base / (1-cv)^k using
//   v/(1-cv)^k   = (P(k) - P(k-1)) / c
//   1/(v(1-cv)^k) = 1/v + c (P(1) + ... + P(k))
inline void shift_pole(const VarTable& t, VarId v, std::int64_t sigma, const Monomial& c,
                       int k, const RatFun& base, PoleNormalForm& out) {
    if (base.is_zero()) return;
    if (k == 0) {
        out.add_laurent(sigma * t.denom(v), base);
        return;
    }
    if (sigma == 0) {
        out.add_pole(c, k, base);
        return;
    }
    if (sigma > 0) {
        RatFun cinv = RatFun::from_monomial(t, c.inverse());
        shift_pole(t, v, sigma - 1, c, k, base * cinv, out);
        shift_pole(t, v, sigma - 1, c, k - 1, -(base * cinv), out);
        return;
    }
    out.add_laurent(sigma * t.denom(v), base);
    RatFun cf = RatFun::from_monomial(t, c);
    for (int j = 1; j <= k; ++j) shift_pole(t, v, sigma + 1, c, j, base * cf, out);
}

} // namespace detail

// Exact partial-fraction decomposition of f with respect to v.  Denominator
// content free of v is carried in the coefficient RatFuns.
inline PoleNormalForm pole_normal_form(const VarTable& t, const RatFun& f, VarId v) {
    PoleNormalForm out;
    if (f.is_zero()) return out;
    VarFactorization fac = factor_in_var(t, f.den(), v);

    LaurentPoly num = f.num();
    std::int64_t dv = t.denom(v);
    std::int64_t tau = num.min_exps()[v];
    if (tau % dv != 0) throw UnsupportedDenominator("fractional power of " + t.name(v));
    Monomial unshift = Monomial::one(t);
    unshift.exps[v] = -tau;
    num = num.mul_monomial(unshift);
    std::int64_t sigma = (tau - fac.vshift) / dv;

    // working fraction G/(W * remaining factors)
    std::vector<std::pair<Monomial, int>> facs(fac.factors.begin(), fac.factors.end());
    auto byg = num.by_var(v);
    std::int64_t degG = byg.rbegin()->first / dv;
    std::vector<LaurentPoly> G(static_cast<size_t>(degG) + 1);
    for (auto& [e, c] : byg) G[static_cast<size_t>(e / dv)] = c;
    LaurentPoly W = fac.content;

    for (size_t i = 0; i < facs.size(); ++i) {
        const Monomial c = facs[i].first;
        const Monomial cinv = c.inverse();
        while (facs[i].second > 0) {
            LaurentPoly beta = LaurentPoly::one(t);
            for (size_t j = 0; j < facs.size(); ++j) {
                if (j == i) continue;
                LaurentPoly b = LaurentPoly::one(t) - LaurentPoly(facs[j].first * cinv);
                for (int r = 0; r < facs[j].second; ++r) beta = beta * b;
            }
            LaurentPoly Gval;
            {
                Monomial pw = Monomial::one(t);
                for (size_t k = 0; k < G.size(); ++k) {
                    Gval = Gval + G[k].mul_monomial(pw);
                    pw = pw * cinv;
                }
            }
            detail::shift_pole(t, v, sigma, c, facs[i].second, RatFun(Gval, W * beta),
                               out);

            // Q = prod_{j != i} (1 - c_j v)^{mu_j} as dense v-polynomial
            std::vector<LaurentPoly> Q(1, LaurentPoly::one(t));
            for (size_t j = 0; j < facs.size(); ++j) {
                if (j == i) continue;
                for (int r = 0; r < facs[j].second; ++r) {
                    std::vector<LaurentPoly> nq(Q.size() + 1);
                    for (size_t k = 0; k < Q.size(); ++k) {
                        nq[k] = nq[k] + Q[k];
                        nq[k + 1] = nq[k + 1] - Q[k].mul_monomial(facs[j].first);
                    }
                    Q = std::move(nq);
                }
            }
            size_t nsz = std::max(G.size(), Q.size());
            std::vector<LaurentPoly> Gt(nsz);
            for (size_t k = 0; k < nsz; ++k) {
                if (k < G.size()) Gt[k] = G[k] * beta;
                if (k < Q.size()) Gt[k] = Gt[k] - Gval * Q[k];
            }
            while (Gt.size() > 1 && Gt.back().is_zero()) Gt.pop_back();
            if (Gt.size() == 1 && Gt[0].is_zero()) {
                G = std::move(Gt);
            } else if (detail::div_binomial(Gt, c)) {
                G = std::move(Gt);
            } else {
                throw QcvError("internal: inexact division in partial fractions");
            }
            W = W * beta;
            facs[i].second -= 1;
        }
    }

    for (size_t k = 0; k < G.size(); ++k) {
        if (G[k].is_zero()) continue;
        out.add_laurent((sigma + static_cast<std::int64_t>(k)) * dv, RatFun(G[k], W));
    }
    out.prune();
    return out;
}

// Recombine a PoleNormalForm back into a single RatFun (test oracle).
inline RatFun pnf_recombine(const VarTable& t, const PoleNormalForm& pnf, VarId v) {
    RatFun acc = RatFun::zero(t);
    for (const auto& [e, r] : pnf.laurent) {
        Monomial m = Monomial::one(t);
        m.exps[v] = e;
        acc = acc + r * RatFun::from_monomial(t, m);
    }
    for (const auto& [key, r] : pnf.poles) {
        LaurentPoly b =
            LaurentPoly::one(t) - LaurentPoly(key.first * Monomial::var(t, v));
        LaurentPoly bk = LaurentPoly::one(t);
        for (int i = 0; i < key.second; ++i) bk = bk * b;
        acc = acc + r * RatFun(LaurentPoly::one(t), bk);
    }
    return acc;
}

} // namespace qcv
