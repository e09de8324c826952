#pragma once

#include "qcv/laurent.hpp"

namespace qcv {

// num/den, den != 0.  Fractions are not GCD-reduced; equality is by
// cross-multiplication.  A common monomial factor is stripped on construction
// to keep exponents small.
class RatFun {
public:
    RatFun() = delete;
    RatFun(LaurentPoly num, LaurentPoly den) : num_(std::move(num)), den_(std::move(den)) {
        if (den_.is_zero()) throw DivisionByZero();
        compact();
    }

    static RatFun zero(const VarTable& t) { return RatFun(LaurentPoly::zero(), LaurentPoly::one(t)); }
    static RatFun one(const VarTable& t) { return RatFun(LaurentPoly::one(t), LaurentPoly::one(t)); }
    static RatFun constant(const VarTable& t, BigRat c) {
        return RatFun(LaurentPoly::constant(t, std::move(c)), LaurentPoly::one(t));
    }
    static RatFun var(const VarTable& t, VarId v) {
        return RatFun(LaurentPoly::var(t, v), LaurentPoly::one(t));
    }
    static RatFun from_monomial(const VarTable& t, const Monomial& m) {
        return RatFun(LaurentPoly(m), LaurentPoly::one(t));
    }

    const LaurentPoly& num() const { return num_; }
    const LaurentPoly& den() const { return den_; }

    bool is_zero() const { return num_.is_zero(); }
    bool is_one_literal() const { return num_ == den_; }

    RatFun operator+(const RatFun& o) const {
        if (is_zero()) return o;
        if (o.is_zero()) return *this;
        if (den_ == o.den_) return RatFun(num_ + o.num_, den_);
        return RatFun(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
    }
    RatFun operator-() const {
        RatFun r = *this;
        r.num_ = -r.num_;
        return r;
    }
    RatFun operator-(const RatFun& o) const { return *this + (-o); }
    RatFun operator*(const RatFun& o) const {
        if (is_zero() || o.is_zero()) return RatFun(LaurentPoly::zero(), den_);
        if (is_one_literal()) return o;
        if (o.is_one_literal()) return *this;
        return RatFun(num_ * o.num_, den_ * o.den_);
    }
    RatFun operator/(const RatFun& o) const {
        if (o.is_zero()) throw DivisionByZero();
        if (is_zero()) return *this;
        return RatFun(num_ * o.den_, den_ * o.num_);
    }
    RatFun inverse() const {
        if (is_zero()) throw DivisionByZero();
        return RatFun(den_, num_);
    }

    RatFun scale(const BigRat& c) const {
        if (c == 0) return RatFun(LaurentPoly::zero(), den_);
        RatFun r = *this;
        r.num_ = r.num_.scale(c);
        return r;
    }

    bool eq(const RatFun& o) const {
        if (num_ == o.num_ && den_ == o.den_) return true;
        return (num_ * o.den_ - o.num_ * den_).is_zero();
    }

    bool depends_on(VarId v) const { return num_.depends_on(v) || den_.depends_on(v); }

    // Cosmetic normalization: strips monomial content of num and den
    // separately (changing nothing up to eq after pairing), then makes the
    // lexicographically first den term have coefficient +1.
    RatFun normalized() const {
        if (is_zero()) return *this;
        RatFun r = *this;
        Monomial lead = r.den_.terms().front();
        r.num_ = r.num_.div_monomial(lead);
        r.den_ = r.den_.div_monomial(lead);
        return r;
    }

    std::string str(const VarTable& t) const {
        if (den_.is_one()) return num_.str(t);
        return "(" + num_.str(t) + ") / (" + den_.str(t) + ")";
    }

private:
    // Strip the common variable-wise minimal exponent shift of num and den.
    void compact() {
        if (num_.is_zero()) return;
        ExpVec mn = num_.min_exps();
        ExpVec md = den_.min_exps();
        bool any = false;
        for (size_t i = 0; i < mn.size(); ++i) {
            mn[i] = std::min(mn[i], md[i]);
            if (mn[i] != 0) any = true;
        }
        if (!any) return;
        Monomial shift(BigRat(1), mn);
        num_ = num_.div_monomial(shift);
        den_ = den_.div_monomial(shift);
    }

    LaurentPoly num_, den_;
};

enum class RfOp { Add, Sub, Mul, Div, Neg };

inline RatFun rf_arith(RfOp op, const RatFun& a, const RatFun& b) {
    switch (op) {
    case RfOp::Add: return a + b;
    case RfOp::Sub: return a - b;
    case RfOp::Mul: return a * b;
    case RfOp::Div: return a / b;
    case RfOp::Neg: return -a;
    }
    throw QcvError("bad op");
}

inline bool rf_eq(const RatFun& a, const RatFun& b) { return a.eq(b); }

inline RatFun rf_substitute(const VarTable& t, const RatFun& a, VarId v,
                            const Monomial& target) {
    LaurentPoly n = substitute(t, a.num(), v, target);
    LaurentPoly d = substitute(t, a.den(), v, target);
    if (d.is_zero()) throw DivisionByZero("denominator vanished under substitution");
    return RatFun(std::move(n), std::move(d));
}

inline RatFun rf_substitute_poly(const VarTable& t, const RatFun& a, VarId v,
                                 const LaurentPoly& target) {
    LaurentPoly n = substitute_poly(t, a.num(), v, target);
    LaurentPoly d = substitute_poly(t, a.den(), v, target);
    if (d.is_zero()) throw DivisionByZero("denominator vanished under substitution");
    return RatFun(std::move(n), std::move(d));
}

} // namespace qcv
