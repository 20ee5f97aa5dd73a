#pragma once

#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "slap/error.hpp"
#include "slap/rng.hpp"

namespace slap {

// A semiring couples the combine (add) and scale (multiply) operations used
// by every kernel in the library. Inputs may come from two different sets
// (left_type, right_type) and outputs from a third (result_type), so
// algebras like "min over selected vertex ids" typecheck without shims.
// add must be associative and commutative with zero() as its identity;
// kernels never invoke multiply on a structurally absent operand, so no
// multiplicative annihilator is required.

template <class SR>
concept SemiringConcept = requires(const SR& s,
                                   typename SR::left_type a,
                                   typename SR::right_type b,
                                   typename SR::result_type c) {
    { s.multiply(a, b) } -> std::convertible_to<typename SR::result_type>;
    { s.add(c, c) } -> std::convertible_to<typename SR::result_type>;
    { s.zero() } -> std::convertible_to<typename SR::result_type>;
    { s.name() } -> std::convertible_to<std::string_view>;
};

template <class T>
struct PlusTimes {
    using left_type = T;
    using right_type = T;
    using result_type = T;
    T multiply(T a, T b) const { return a * b; }
    T add(T a, T b) const { return a + b; }
    T zero() const { return T{0}; }
    std::string_view name() const { return "plus_times"; }
};

/// Boolean or/and algebra; values stored as 0/1 bytes to keep vector
/// storage contiguous.
struct OrAnd {
    using left_type = std::uint8_t;
    using right_type = std::uint8_t;
    using result_type = std::uint8_t;
    std::uint8_t multiply(std::uint8_t a, std::uint8_t b) const { return (a && b) ? 1 : 0; }
    std::uint8_t add(std::uint8_t a, std::uint8_t b) const { return (a || b) ? 1 : 0; }
    std::uint8_t zero() const { return 0; }
    std::string_view name() const { return "or_and"; }
};

/// Tropical algebra: add = min, multiply = +, zero = +infinity.
template <class T>
struct MinPlus {
    using left_type = T;
    using right_type = T;
    using result_type = T;
    static T infinity() {
        if constexpr (std::numeric_limits<T>::has_infinity)
            return std::numeric_limits<T>::infinity();
        else
            return std::numeric_limits<T>::max();
    }
    T multiply(T a, T b) const { return a + b; }
    T add(T a, T b) const { return a < b ? a : b; }
    T zero() const { return infinity(); }
    std::string_view name() const { return "min_plus"; }
};

/// multiply(a, b) = b, add = min. Propagates the smallest right-operand
/// value across an adjacency structure (the hooking step of connected
/// components). Left operands act as structural presence only.
template <class L, class T>
struct MinSelect2nd {
    using left_type = L;
    using right_type = T;
    using result_type = T;
    T multiply(const L&, T b) const { return b; }
    T add(T a, T b) const { return a < b ? a : b; }
    T zero() const { return std::numeric_limits<T>::max(); }
    std::string_view name() const { return "min_select2nd"; }
};

using PlusTimesF64 = PlusTimes<double>;
using PlusTimesI64 = PlusTimes<std::int64_t>;
using MinPlusF64 = MinPlus<double>;
using MinSelect2ndI64 = MinSelect2nd<std::int64_t, std::int64_t>;

/// Named deterministic value transform for filter/inflation steps. Any
/// invocable works where kernels take a transform or predicate; this
/// wrapper just attaches a tag for reporting.
template <class V, class R = V>
struct UnaryOp {
    std::function<R(const V&)> apply;
    std::string name;

    R operator()(const V& v) const { return apply(v); }
};

enum class SemiringId {
    plus_times_f64,
    plus_times_i64,
    or_and_bool,
    min_plus_f64,
    min_select2nd_i64,
};

/// Resolves a semiring by its registered name. Throws NameError for
/// anything not in the registry.
SemiringId builtin_semiring(std::string_view name);

const std::vector<std::string>& builtin_semiring_names();

/// Calls f with a value of the concrete semiring type selected by id.
template <class F>
decltype(auto) dispatch_semiring(SemiringId id, F&& f) {
    switch (id) {
    case SemiringId::plus_times_f64: return f(PlusTimesF64{});
    case SemiringId::plus_times_i64: return f(PlusTimesI64{});
    case SemiringId::or_and_bool: return f(OrAnd{});
    case SemiringId::min_plus_f64: return f(MinPlusF64{});
    case SemiringId::min_select2nd_i64: return f(MinSelect2ndI64{});
    }
    throw NameError("unknown semiring id");
}

struct LawViolation {
    std::string law;     // "associativity", "commutativity", "identity"
    std::string detail;
};

/// Samples triples/pairs from `samples` and checks the add-monoid laws:
/// associativity, commutativity, and zero() as identity. Violations are
/// returned, not thrown. `eq` decides value equality (use exact equality
/// for exact types; supply a tolerance-aware predicate for floats fed
/// with non-representable values).
template <class SR, class Eq>
std::vector<LawViolation> check_semiring_laws(const SR& sr,
                                              const std::vector<typename SR::result_type>& samples,
                                              std::uint64_t seed,
                                              Eq eq,
                                              std::size_t trials = 256) {
    using T = typename SR::result_type;
    std::vector<LawViolation> out;
    if (samples.empty()) return out;
    Rng rng(seed);
    auto pick = [&]() -> const T& { return samples[rng.next_below(samples.size())]; };
    auto report = [&](const char* law, const std::string& detail) {
        out.push_back(LawViolation{law, detail});
    };
    for (std::size_t t = 0; t < trials; ++t) {
        const T& x = pick();
        const T& y = pick();
        const T& z = pick();
        if (!eq(sr.add(sr.add(x, y), z), sr.add(x, sr.add(y, z))))
            report("associativity", "add(add(x,y),z) != add(x,add(y,z))");
        if (!eq(sr.add(x, y), sr.add(y, x)))
            report("commutativity", "add(x,y) != add(y,x)");
        if (!eq(sr.add(x, sr.zero()), x))
            report("identity", "add(x, zero) != x");
        if (!out.empty() && out.size() >= 8) break; // enough evidence
    }
    return out;
}

template <class SR>
std::vector<LawViolation> check_semiring_laws(const SR& sr,
                                              const std::vector<typename SR::result_type>& samples,
                                              std::uint64_t seed) {
    using T = typename SR::result_type;
    return check_semiring_laws(sr, samples, seed, [](const T& a, const T& b) { return a == b; });
}

} // namespace slap
