#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qcv/monomial.hpp"

namespace qcv {

// Finite sum of monomials, kept sorted by exponent vector with no zero terms.
class LaurentPoly {
public:
    LaurentPoly() = default;
    explicit LaurentPoly(Monomial m) {
        if (!m.is_zero()) terms_.push_back(std::move(m));
    }
    static LaurentPoly zero() { return LaurentPoly(); }
    static LaurentPoly one(const VarTable& t) { return LaurentPoly(Monomial::one(t)); }
    static LaurentPoly constant(const VarTable& t, BigRat c) {
        return LaurentPoly(Monomial(std::move(c), ExpVec(t.size(), 0)));
    }
    static LaurentPoly var(const VarTable& t, VarId v) {
        return LaurentPoly(Monomial::var(t, v));
    }

    static LaurentPoly from_terms(std::vector<Monomial> ms) {
        std::map<ExpVec, BigRat> acc;
        for (auto& m : ms) {
            if (m.is_zero()) continue;
            acc[m.exps] += m.coeff;
        }
        LaurentPoly p;
        for (auto& [e, c] : acc)
            if (c != 0) p.terms_.push_back(Monomial(c, e));
        return p;
    }

    const std::vector<Monomial>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    size_t nterms() const { return terms_.size(); }

    bool is_monomial() const { return terms_.size() == 1; }
    const Monomial& as_monomial() const { return terms_.at(0); }

    bool is_one() const {
        return terms_.size() == 1 && terms_[0].coeff == 1 && terms_[0].is_constant();
    }

    bool operator==(const LaurentPoly& o) const {
        if (terms_.size() != o.terms_.size()) return false;
        for (size_t i = 0; i < terms_.size(); ++i)
            if (terms_[i].exps != o.terms_[i].exps ||
                terms_[i].coeff != o.terms_[i].coeff)
                return false;
        return true;
    }

    LaurentPoly operator+(const LaurentPoly& o) const {
        LaurentPoly r;
        r.terms_.reserve(terms_.size() + o.terms_.size());
        size_t i = 0, j = 0;
        while (i < terms_.size() && j < o.terms_.size()) {
            if (terms_[i].exps == o.terms_[j].exps) {
                BigRat c = terms_[i].coeff + o.terms_[j].coeff;
                if (c != 0) r.terms_.push_back(Monomial(std::move(c), terms_[i].exps));
                ++i, ++j;
            } else if (exp_less(terms_[i].exps, o.terms_[j].exps)) {
                r.terms_.push_back(terms_[i++]);
            } else {
                r.terms_.push_back(o.terms_[j++]);
            }
        }
        for (; i < terms_.size(); ++i) r.terms_.push_back(terms_[i]);
        for (; j < o.terms_.size(); ++j) r.terms_.push_back(o.terms_[j]);
        return r;
    }

    LaurentPoly operator-() const {
        LaurentPoly r = *this;
        for (auto& m : r.terms_) m.coeff = -m.coeff;
        return r;
    }
    LaurentPoly operator-(const LaurentPoly& o) const { return *this + (-o); }

    LaurentPoly operator*(const LaurentPoly& o) const {
        if (is_zero() || o.is_zero()) return LaurentPoly();
        if (is_monomial()) return o.mul_monomial(terms_[0]);
        if (o.is_monomial()) return mul_monomial(o.terms_[0]);
        std::map<ExpVec, BigRat> acc;
        for (const auto& a : terms_)
            for (const auto& b : o.terms_) {
                ExpVec e = a.exps;
                for (size_t k = 0; k < e.size(); ++k) e[k] += b.exps[k];
                acc[std::move(e)] += a.coeff * b.coeff;
            }
        LaurentPoly r;
        for (auto& [e, c] : acc)
            if (c != 0) r.terms_.push_back(Monomial(c, e));
        return r;
    }

    // Exponent shift preserves the sort order, so no re-sorting here.
    LaurentPoly mul_monomial(const Monomial& m) const {
        if (m.is_zero()) return LaurentPoly();
        LaurentPoly r = *this;
        for (auto& t : r.terms_) {
            t.coeff *= m.coeff;
            for (size_t k = 0; k < t.exps.size(); ++k) t.exps[k] += m.exps[k];
        }
        return r;
    }

    LaurentPoly scale(const BigRat& c) const {
        if (c == 0) return LaurentPoly();
        LaurentPoly r = *this;
        for (auto& t : r.terms_) t.coeff *= c;
        return r;
    }

    // Exact division by a monomial.
    LaurentPoly div_monomial(const Monomial& m) const { return mul_monomial(m.inverse()); }

    // Variable-wise minimum exponents across all terms (0 if absent).
    ExpVec min_exps() const {
        if (terms_.empty()) return ExpVec();
        ExpVec r = terms_[0].exps;
        for (const auto& t : terms_)
            for (size_t i = 0; i < r.size(); ++i) r[i] = std::min(r[i], t.exps[i]);
        return r;
    }

    bool depends_on(VarId v) const {
        for (const auto& t : terms_)
            if (t.exps[v] != 0) return true;
        return false;
    }

    // View as a polynomial in v: scaled v-exponent -> coefficient (v removed).
    std::map<std::int64_t, LaurentPoly> by_var(VarId v) const {
        std::map<std::int64_t, std::vector<Monomial>> groups;
        for (const auto& t : terms_) {
            Monomial m = t;
            std::int64_t e = m.exps[v];
            m.exps[v] = 0;
            groups[e].push_back(std::move(m));
        }
        std::map<std::int64_t, LaurentPoly> r;
        for (auto& [e, ms] : groups) r.emplace(e, LaurentPoly::from_terms(std::move(ms)));
        return r;
    }

    std::string str(const VarTable& t) const {
        if (terms_.empty()) return "0";
        std::string s;
        for (size_t i = 0; i < terms_.size(); ++i) {
            if (i) s += " + ";
            s += terms_[i].str(t);
        }
        return s;
    }

private:
    std::vector<Monomial> terms_;
};

// Substitute v -> target monomial.  Exponent e of v becomes target^e; needs
// the scaled exponents of the result to stay integral.
inline LaurentPoly substitute(const VarTable& t, const LaurentPoly& p, VarId v,
                              const Monomial& target) {
    std::vector<Monomial> out;
    for (const auto& m : p.terms()) {
        std::int64_t e = m.exps[v];
        Monomial base = m;
        base.exps[v] = 0;
        if (e == 0) {
            out.push_back(base);
            continue;
        }
        Monomial pw = target.pow(e, t.denom(v));
        out.push_back(base * pw);
    }
    return LaurentPoly::from_terms(std::move(out));
}

// Substitute v -> general Laurent polynomial; only nonnegative integral
// exponents of v are supported (used for additive spectral shifts u -> u+v).
inline LaurentPoly substitute_poly(const VarTable& t, const LaurentPoly& p, VarId v,
                                   const LaurentPoly& target) {
    std::map<std::int64_t, LaurentPoly> by = p.by_var(v);
    LaurentPoly r;
    for (auto& [e, coeff] : by) {
        if (e % t.denom(v) != 0)
            throw ExponentDenominator("polynomial substitution with fractional power");
        std::int64_t k = e / t.denom(v);
        if (k < 0) throw Unsupported("polynomial substitution with negative power");
        LaurentPoly pw = LaurentPoly::one(t);
        for (std::int64_t i = 0; i < k; ++i) pw = pw * target;
        r = r + coeff * pw;
    }
    return r;
}

} // namespace qcv
