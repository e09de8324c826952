#include <doctest.h>

#include "qcv/dist.hpp"

using namespace qcv;

namespace {

struct Ctx {
    VarTable t;
    VarId q, z, w;
    Ctx() {
        q = t.add("q", VarKind::Parameter, 2);
        z = t.add("z", VarKind::Spectral);
        w = t.add("w", VarKind::Spectral);
    }
    RatFun one() const { return RatFun::one(t); }
    RatFun zv() const { return RatFun::var(t, z); }
    RatFun wv() const { return RatFun::var(t, w); }
    RatFun qp(std::int64_t k) const {
        return RatFun::from_monomial(t, Monomial::var(t, q, k));
    }
    DistExpr iz(const RatFun& f) const { return dist_from_ratfun(t, f, {{z, Region::Zero}}); }
    DistExpr iinf(const RatFun& f) const {
        return dist_from_ratfun(t, f, {{z, Region::Infinity}});
    }
    std::map<VarId, Window> winz(std::int64_t lo, std::int64_t hi) const {
        return {{z, Window{lo, hi}}, {w, Window{lo, hi}}};
    }
    RatFun table_at(const CoeffTable& tab, std::int64_t ez, std::int64_t ew) const {
        ExpVec k(static_cast<size_t>(t.size()), 0);
        k[static_cast<size_t>(z)] = ez;
        k[static_cast<size_t>(w)] = ew;
        auto it = tab.coeffs.find(k);
        return it == tab.coeffs.end() ? RatFun::zero(t) : it->second;
    }
};

} // namespace

TEST_CASE("construction and truncation basics") {
    Ctx c;
    SUBCASE("iota_0(1/(1-z))") {
        auto d = c.iz(c.one() / (c.one() - c.zv()));
        auto tab = truncate(d, c.winz(-2, 2));
        CHECK(rf_eq(c.table_at(tab, -2, 0), RatFun::zero(c.t)));
        CHECK(rf_eq(c.table_at(tab, -1, 0), RatFun::zero(c.t)));
        for (int k = 0; k <= 2; ++k) CHECK(rf_eq(c.table_at(tab, k, 0), c.one()));
    }
    SUBCASE("delta(z) has coefficient 1 everywhere") {
        auto d = dist_delta(c.t, Monomial::var(c.t, c.z));
        auto tab = truncate(d, c.winz(-2, 2));
        for (int k = -2; k <= 2; ++k) CHECK(rf_eq(c.table_at(tab, k, 0), c.one()));
    }
    SUBCASE("delta of a constant is rejected") {
        CHECK_THROWS(dist_delta(c.t, Monomial::var(c.t, c.q, 2)));
    }
    SUBCASE("untagged spectral denominator is rejected") {
        CHECK_THROWS_AS(dist_from_ratfun(c.t, c.one() / (c.one() - c.zv()), {}),
                        NonExpandable);
    }
}

TEST_CASE("dist_mul substitution rules") {
    Ctx c;
    auto dz = dist_delta(c.t, Monomial::var(c.t, c.z));

    SUBCASE("(1-z) delta(z) = 0") {
        auto f = DistExpr::from_regular(c.t, RegularTerm{c.one() - c.zv(), {}});
        CHECK(dist_is_zero(f * dz));
    }
    SUBCASE("iota_0(1/(1-z)) delta(z) diverges") {
        auto f = c.iz(c.one() / (c.one() - c.zv()));
        CHECK_THROWS_AS(f * dz, Divergent);
    }
    SUBCASE("iota_inf(1/(1-z)) delta(z) diverges as well") {
        auto f = c.iinf(c.one() / (c.one() - c.zv()));
        CHECK_THROWS_AS(f * dz, Divergent);
    }
    SUBCASE("iota_0(1/(1-q^2 z)) delta(z) = 1/(1-q^2) delta(z)") {
        auto f = c.iz(c.one() / (c.one() - c.qp(2) * c.zv()));
        auto got = f * dz;
        auto want = dist_scale(dz, c.one() / (c.one() - c.qp(2)));
        CHECK(dist_eq(got, want));
        // cross-check through the truncation oracle
        CHECK(table_eq(truncate(got, c.winz(-3, 3)), truncate(want, c.winz(-3, 3))));
    }
    SUBCASE("f(z) delta(z/a) = f(a) delta(z/a) independent of the region tag") {
        // a = q^2 w ; f = 1/(1 - q^2 z), both tags
        Monomial arg = Monomial::var(c.t, c.z) *
                       (Monomial::var(c.t, c.q, 2) * Monomial::var(c.t, c.w)).inverse();
        auto dzw = dist_delta(c.t, arg); // delta(z/(q^2 w)), support z = q^2 w
        RatFun f = c.one() / (c.one() - c.qp(2) * c.zv());
        for (auto reg : {Region::Zero, Region::Infinity}) {
            auto fe = dist_from_ratfun(c.t, f, {{c.z, reg}, {c.w, reg}});
            auto got = fe * dzw;
            RatFun fa = c.one() / (c.one() - c.qp(4) * c.wv());
            auto want = dzw * dist_from_ratfun(c.t, fa, {{c.w, reg}});
            CHECK(dist_eq(got, want));
        }
    }
}

TEST_CASE("dist_eq identities") {
    Ctx c;
    SUBCASE("delta(z/w) equals delta(w/z)") {
        Monomial zw = Monomial::var(c.t, c.z) * Monomial::var(c.t, c.w).inverse();
        CHECK(dist_eq(dist_delta(c.t, zw), dist_delta(c.t, zw.inverse())));
    }
    SUBCASE("iota_0 - iota_inf of 1/(1-z) is delta(z)") {
        RatFun f = c.one() / (c.one() - c.zv());
        auto diff = c.iz(f) - c.iinf(f);
        CHECK(dist_eq(diff, dist_delta(c.t, Monomial::var(c.t, c.z))));
    }
    SUBCASE("a + 0 = a") {
        auto a = c.iz(c.one() / (c.one() - c.qp(2) * c.zv()));
        CHECK(dist_eq(a + DistExpr::zero(c.t), a));
    }
    SUBCASE("opposite expansions differ") {
        RatFun f = c.one() / (c.one() - c.zv());
        CHECK(!dist_eq(c.iz(f), c.iinf(f)));
    }
}

TEST_CASE("coefficientwise limits reproduce the displayed triple") {
    Ctx c;
    RatFun geo = c.one() / (c.one() - c.zv());
    ExpVec up(static_cast<size_t>(c.t.size()), 0), down = up;
    up[static_cast<size_t>(c.z)] = 1;
    down[static_cast<size_t>(c.z)] = -1;

    SUBCASE("lim z^N iota_0(1/(1-z)) = 0") {
        CHECK(dist_is_zero(limit(LimitFamily::from_dist(c.iz(geo), up))));
    }
    SUBCASE("lim z^-N iota_0(1/(1-z)) = delta(z)") {
        auto got = limit(LimitFamily::from_dist(c.iz(geo), down));
        CHECK(dist_eq(got, dist_delta(c.t, Monomial::var(c.t, c.z))));
    }
    SUBCASE("lim z^-N iota_0(1/(1-q^2 z)) = 0 in |q|<1") {
        auto d = c.iz(c.one() / (c.one() - c.qp(2) * c.zv()));
        CHECK(dist_is_zero(limit(LimitFamily::from_dist(d, down))));
    }
    SUBCASE("product of limits differs from limit of products") {
        auto f1 = LimitFamily::from_dist(c.iz(geo), up);
        auto f2 = LimitFamily::from_dist(c.iz(geo), down);
        auto lim_of_prod = limit(f1 * f2);
        // the product family has slope zero: its limit is iota_0(1/(1-z))^2
        CHECK(dist_eq(lim_of_prod, c.iz(geo * geo)));
        // while the product of the limits is 0 * delta(z) = 0
        auto prod_of_lims = limit(f1) * limit(f2);
        CHECK(dist_is_zero(prod_of_lims));
        CHECK(!dist_eq(lim_of_prod, prod_of_lims));
    }
    SUBCASE("limits agree with the truncation oracle at sampled N") {
        // z^{-N} iota_0(1/(1-z)) at N = 4, 8, 16: window coefficients stabilize to 1
        for (std::int64_t N : {4, 8, 16}) {
            RatFun zN = RatFun::from_monomial(c.t, Monomial::var(c.t, c.z, -N));
            auto d = dist_scale(c.iz(geo), zN);
            auto tab = truncate(d, c.winz(-3, 3));
            for (int k = -3; k <= 3; ++k) CHECK(rf_eq(c.table_at(tab, k, 0), c.one()));
        }
    }
}

namespace {

// deterministic small LCG
struct Rng {
    std::uint64_t s = 0x9e3779b97f4a7c15ull;
    std::uint64_t next() {
        s = s * 6364136223846793005ull + 1442695040888963407ull;
        return s >> 33;
    }
    int pick(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
};

DistExpr random_regular(Ctx& c, Rng& rng) {
    // products of poles from a divergence-free pool, all tagged z->0, w->0
    RatFun f = c.one();
    std::map<VarId, Region> tags{{c.z, Region::Zero}, {c.w, Region::Zero}};
    int npoles = 1 + rng.pick(2);
    for (int i = 0; i < npoles; ++i) {
        switch (rng.pick(4)) {
        case 0: f = f / (c.one() - c.zv()); break;
        case 1: f = f / (c.one() - c.qp(2) * c.zv()); break;
        case 2: f = f / (c.one() - c.wv()); break;
        case 3: f = f / (c.one() - c.qp(2) * c.zv() * c.wv()); break;
        }
    }
    int k = rng.pick(3) - 1;
    f = f * RatFun::from_monomial(c.t, Monomial::var(c.t, c.z, k));
    if (rng.pick(2)) f = f * (c.one() + c.qp(2) * c.zv());
    return dist_from_ratfun(c.t, f, tags);
}

DistExpr random_term(Ctx& c, Rng& rng) {
    if (rng.pick(3) == 0) {
        // a delta factor against a w-pole keeps products divergence-free
        Monomial arg = Monomial::var(c.t, c.z) *
                       Monomial::var(c.t, c.q, 2 * (rng.pick(2) + 1)).inverse();
        auto d = dist_delta(c.t, arg);
        auto f = dist_from_ratfun(c.t, c.one() / (c.one() - c.qp(2) * c.wv()),
                                  {{c.w, Region::Zero}});
        return d * f;
    }
    return random_regular(c, rng);
}

} // namespace

TEST_CASE("oracle soundness: products, convolution, associativity, commutativity") {
    Ctx c;
    Rng rng;
    auto win = c.winz(-4, 4);
    auto winBig = c.winz(-8, 8);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        DistExpr a = random_term(c, rng);
        DistExpr b = random_term(c, rng);
        DistExpr ab = a * b;
        // convolution of truncations on an enlarged interior window
        CoeffTable ta = truncate(a, winBig);
        CoeffTable tb = truncate(b, winBig);
        CoeffTable tab = truncate(ab, win);
        for (const auto& [k, v] : tab.coeffs) {
            RatFun conv = RatFun::zero(c.t);
            for (const auto& [ka, va] : ta.coeffs) {
                ExpVec kb = k;
                bool ok = true;
                for (size_t i = 0; i < kb.size(); ++i) {
                    kb[i] -= ka[i];
                    if (kb[i] < -8 || kb[i] > 8) ok = false;
                }
                if (!ok) continue;
                auto it = tb.coeffs.find(kb);
                if (it != tb.coeffs.end()) conv = conv + va * it->second;
            }
            CHECK(rf_eq(conv, v));
            ++checked;
        }
        // commutativity
        CHECK(dist_eq(ab, b * a));
        // associativity on divergence-free triples
        DistExpr d3 = random_regular(c, rng);
        bool ok = true;
        DistExpr lhs = DistExpr::zero(c.t), rhs = DistExpr::zero(c.t);
        try {
            lhs = (a * b) * d3;
            rhs = a * (b * d3);
        } catch (const Divergent&) {
            ok = false;
        }
        if (ok) CHECK(table_eq(truncate(lhs, win), truncate(rhs, win)));
    }
    CHECK(checked > 100);
}
