#pragma once

#include <stdexcept>
#include <string>

namespace fbmclt {

// Invalid configuration or out-of-contract input. The CLI maps this to exit 2.
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Parameters outside the validity range of the limit constant C_{H,d}
// (it diverges at H = 1/(d+2) and H = 1/d).
struct regime_error : config_error {
    using config_error::config_error;
};

// A numerical routine failed to meet its accuracy or stability contract.
// The CLI maps this to exit 3.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fbmclt
