#pragma once

#include <map>

#include "qcv/ratfun.hpp"

namespace qcv {

enum class Region { Zero, Infinity };

inline const char* region_name(Region r) { return r == Region::Zero ? "0" : "inf"; }

// Window of exact coefficients of a Laurent expansion in one variable.
// Exponents are in scaled units of `var`; coefficients are RatFuns in the
// remaining variables.
struct TruncatedSeries {
    VarId var = -1;
    Region region = Region::Zero;
    std::int64_t lo = 0, hi = 0; // scaled exponents, inclusive
    std::map<std::int64_t, RatFun> coeffs;

    RatFun coeff(const VarTable& t, std::int64_t e) const {
        auto it = coeffs.find(e);
        return it == coeffs.end() ? RatFun::zero(t) : it->second;
    }
};

// Geometric-series inversion of f = num/den in `var` around 0 or infinity.
// The pivot coefficient of den (lowest v-order for Zero, highest for
// Infinity) is inverted as a RatFun in the remaining variables.
inline TruncatedSeries rf_expand(const VarTable& t, const RatFun& f, VarId v,
                                 Region region, std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw QcvError("empty expansion window");
    std::int64_t dv = t.denom(v);
    TruncatedSeries out;
    out.var = v;
    out.region = region;
    out.lo = lo;
    out.hi = hi;
    if (f.is_zero()) return out;

    auto nby = f.num().by_var(v);
    auto dby = f.den().by_var(v);
    for (const auto* by : {&nby, &dby})
        for (const auto& [e, c] : *by)
            if (e % dv != 0) throw NonExpandable("fractional power of " + t.name(v));

    const bool zero = (region == Region::Zero);
    std::int64_t dpiv = zero ? dby.begin()->first / dv : dby.rbegin()->first / dv;
    LaurentPoly piv = zero ? dby.begin()->second : dby.rbegin()->second;
    if (piv.is_zero()) throw NonExpandable("zero pivot coefficient");
    RatFun pivinv(LaurentPoly::one(t), piv);

    // s_j defined by den * s = num; direction depends on the region.
    std::int64_t nstart = zero ? nby.begin()->first / dv : nby.rbegin()->first / dv;
    std::int64_t estart = nstart - dpiv; // first (resp. last) exponent of the series

    auto num_coeff = [&](std::int64_t k) -> LaurentPoly {
        auto it = nby.find(k * dv);
        return it == nby.end() ? LaurentPoly::zero() : it->second;
    };
    auto den_coeff = [&](std::int64_t k) -> LaurentPoly {
        auto it = dby.find(k * dv);
        return it == dby.end() ? LaurentPoly::zero() : it->second;
    };

    auto floor_div = [](std::int64_t a, std::int64_t b) {
        std::int64_t q = a / b, r = a % b;
        return (r != 0 && r < 0) ? q - 1 : q;
    };
    auto ceil_div = [](std::int64_t a, std::int64_t b) {
        std::int64_t q = a / b, r = a % b;
        return (r != 0 && r > 0) ? q + 1 : q;
    };
    std::int64_t want_lo = ceil_div(lo, dv), want_hi = floor_div(hi, dv);

    std::vector<RatFun> s; // coefficients walked away from estart
    if (zero) {
        for (std::int64_t j = estart; j <= want_hi; ++j) {
            RatFun acc(num_coeff(j + dpiv), LaurentPoly::one(t));
            for (std::int64_t i = estart; i < j; ++i) {
                LaurentPoly dk = den_coeff(j - i + dpiv);
                if (dk.is_zero()) continue;
                acc = acc - s[static_cast<size_t>(i - estart)] *
                                RatFun(dk, LaurentPoly::one(t));
            }
            s.push_back(acc * pivinv);
            std::int64_t e = j * dv;
            if (e >= lo && e <= hi && !s.back().is_zero())
                out.coeffs.emplace(e, s.back());
        }
    } else {
        for (std::int64_t j = estart; j >= want_lo; --j) {
            RatFun acc(num_coeff(j + dpiv), LaurentPoly::one(t));
            for (std::int64_t i = estart; i > j; --i) {
                LaurentPoly dk = den_coeff(j - i + dpiv);
                if (dk.is_zero()) continue;
                acc = acc - s[static_cast<size_t>(estart - i)] *
                                RatFun(dk, LaurentPoly::one(t));
            }
            s.push_back(acc * pivinv);
            std::int64_t e = j * dv;
            if (e >= lo && e <= hi && !s.back().is_zero())
                out.coeffs.emplace(e, s.back());
        }
    }
    return out;
}

} // namespace qcv
