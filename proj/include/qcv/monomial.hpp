#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <numeric>
#include <sstream>
#include <vector>

#include "qcv/vartable.hpp"

namespace qcv {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

using ExpVec = std::vector<std::int64_t>; // scaled exponents, one per variable

// coeff * prod_v v^(exps[v]/denom(v))
struct Monomial {
    BigRat coeff;
    ExpVec exps;

    Monomial() : coeff(0) {}
    Monomial(BigRat c, ExpVec e) : coeff(std::move(c)), exps(std::move(e)) {}

    static Monomial one(const VarTable& t) {
        return Monomial(BigRat(1), ExpVec(t.size(), 0));
    }
    static Monomial var(const VarTable& t, VarId v, std::int64_t num = 1,
                        std::int64_t den = 1) {
        Monomial m = one(t);
        if ((num * t.denom(v)) % den != 0)
            throw ExponentDenominator(t.name(v) + "^(" + std::to_string(num) + "/" +
                                      std::to_string(den) + ")");
        m.exps[v] = num * t.denom(v) / den;
        return m;
    }

    bool is_zero() const { return coeff == 0; }
    bool is_constant() const {
        for (auto e : exps)
            if (e != 0) return false;
        return true;
    }

    Monomial operator*(const Monomial& o) const {
        Monomial r(coeff * o.coeff, exps);
        for (size_t i = 0; i < r.exps.size(); ++i) r.exps[i] += o.exps[i];
        return r;
    }

    Monomial inverse() const {
        if (coeff == 0) throw DivisionByZero("inverse of zero monomial");
        Monomial r(BigRat(1) / coeff, exps);
        for (auto& e : r.exps) e = -e;
        return r;
    }

    // m^(k/d) with rational exponent; requires every resulting exponent to be
    // integral in the scaled representation and the coefficient power exact.
    Monomial pow(std::int64_t k, std::int64_t d = 1) const {
        Monomial r(BigRat(1), ExpVec(exps.size(), 0));
        for (size_t i = 0; i < exps.size(); ++i) {
            std::int64_t num = exps[i] * k;
            if (num % d != 0) throw ExponentDenominator("fractional monomial power");
            r.exps[i] = num / d;
        }
        if (d == 1 || coeff == 1) {
            r.coeff = coeff_pow(coeff, k);
            if (coeff == 1) r.coeff = 1;
        } else {
            throw ExponentDenominator("fractional power of non-unit coefficient");
        }
        return r;
    }

    static BigRat coeff_pow(const BigRat& c, std::int64_t k) {
        if (k == 0) return BigRat(1);
        BigRat base = c;
        std::int64_t n = k;
        if (n < 0) {
            if (c == 0) throw DivisionByZero("0^negative");
            base = BigRat(1) / c;
            n = -n;
        }
        BigRat r(1);
        while (n > 0) {
            if (n & 1) r *= base;
            base *= base;
            n >>= 1;
        }
        return r;
    }

    std::string str(const VarTable& t) const {
        std::ostringstream os;
        os << coeff.str();
        for (int v = 0; v < t.size(); ++v) {
            if (exps[v] == 0) continue;
            os << "*" << t.name(v) << "^";
            if (exps[v] % t.denom(v) == 0)
                os << exps[v] / t.denom(v);
            else
                os << "(" << exps[v] << "/" << t.denom(v) << ")";
        }
        return os.str();
    }
};

inline bool exp_less(const ExpVec& a, const ExpVec& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

} // namespace qcv
