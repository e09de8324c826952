#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qcv/errors.hpp"

namespace qcv {

using VarId = int;

enum class VarKind {
    Parameter, // q, kappa, h: carries coefficients, never expanded against
    Spectral   // z, w, u, ...: region expansions and delta supports live here
};

// Fixed, ordered variable context for one computation.  Exponents of variable
// v are stored as integers scaled by denom(v): a stored value k means k/denom(v).
class VarTable {
public:
    VarTable() = default;

    VarId add(std::string name, VarKind kind, std::int64_t denom = 1) {
        if (denom < 1) throw QcvError("denominator bound must be >= 1");
        for (const auto& n : names_)
            if (n == name) throw QcvError("duplicate variable " + name);
        names_.push_back(std::move(name));
        kinds_.push_back(kind);
        denoms_.push_back(denom);
        return static_cast<VarId>(names_.size() - 1);
    }

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(VarId v) const { return names_.at(v); }
    VarKind kind(VarId v) const { return kinds_.at(v); }
    std::int64_t denom(VarId v) const { return denoms_.at(v); }
    bool is_spectral(VarId v) const { return kinds_.at(v) == VarKind::Spectral; }

    std::optional<VarId> find(const std::string& name) const {
        for (int i = 0; i < size(); ++i)
            if (names_[i] == name) return i;
        return std::nullopt;
    }

    VarId require(const std::string& name) const {
        auto v = find(name);
        if (!v) throw QcvError("unknown variable " + name);
        return *v;
    }

private:
    std::vector<std::string> names_;
    std::vector<VarKind> kinds_;
    std::vector<std::int64_t> denoms_;
};

} // namespace qcv
