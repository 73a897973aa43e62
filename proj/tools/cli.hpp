#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

namespace jamset::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kNumericalError = 3;
inline constexpr int kRejectionExhausted = 4;

// Inline JSON, or @path to read it from a file.
nlohmann::json load_spec(const std::string& text);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace jamset::cli
