#pragma once

#include <stdexcept>
#include <string>

namespace csphere {

// Argument outside the mathematical domain of an operation.
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// A computation lost rank or accuracy beyond its tolerance.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A request exceeds a configured node / memory budget.
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw domain_error(what);
}

} // namespace csphere
