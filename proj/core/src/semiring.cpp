#include "slap/semiring.hpp"

namespace slap {

SemiringId builtin_semiring(std::string_view name) {
    if (name == "plus_times_f64") return SemiringId::plus_times_f64;
    if (name == "plus_times_i64") return SemiringId::plus_times_i64;
    if (name == "or_and_bool") return SemiringId::or_and_bool;
    if (name == "min_plus_f64") return SemiringId::min_plus_f64;
    if (name == "min_select2nd_i64") return SemiringId::min_select2nd_i64;
    throw NameError("no builtin semiring named '" + std::string(name) + "'");
}

const std::vector<std::string>& builtin_semiring_names() {
    static const std::vector<std::string> names = {
        "plus_times_f64", "plus_times_i64", "or_and_bool",
        "min_plus_f64", "min_select2nd_i64",
    };
    return names;
}

} // namespace slap
