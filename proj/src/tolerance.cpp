#include "subspace/tolerance.hpp"

#include "subspace/errors.hpp"

#include <cstdlib>
#include <string>

namespace subspace {

Tolerances Tolerances::from_env_value(const char *value) {
    Tolerances t;
    if (value == nullptr || *value == '\0') {
        return t;
    }
    char *end = nullptr;
    const double parsed = std::strtod(value, &end);
    if (end == value || *end != '\0' || !(parsed > 0.0)) {
        throw ConfigError("SUBSPACE_TOL must be a positive number, got '" +
                          std::string(value) + "'");
    }
    t.abs = parsed;
    t.rel = parsed * 100.0;
    return t;
}

const Tolerances &tolerances() {
    static const Tolerances instance =
        Tolerances::from_env_value(std::getenv("SUBSPACE_TOL"));
    return instance;
}

} // namespace subspace
