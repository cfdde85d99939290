#pragma once

#include "lambda_thermo/error.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace lambda_thermo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  ///< acceptance failure or unexpected error
inline constexpr int kExitUsage = 2;    ///< validation, domain, unknown command, grid cap
inline constexpr int kExitNonConvergence = 3;

inline constexpr std::size_t kDefaultGridCap = 100000;

/// Grid larger than the configured cap.
class GridCapExceeded : public DomainError {
public:
    using DomainError::DomainError;
};

/// "start:stop:step" (start included, stop excluded with a 1e-9·|step|
/// guard), "a,b,c", or a single value.
std::vector<double> parse_grid(std::string_view text, std::size_t cap = kDefaultGridCap);

/// argv without the program name. Output goes to `out` unless --output is given.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace lambda_thermo::cli
