#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace quadnet {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Flat config grammar, one entry per line:
///
///   # comment              (anything after '#' is ignored)
///   key = value            (key: [a-z0-9_]+, value: rest of line, trimmed)
///
/// Blank lines are skipped; repeated keys and malformed lines are errors.
std::map<std::string, std::string> parse_config(std::string_view text);

/// Hex SHA-1 of "blob <size>\0" + content, as `git hash-object` computes.
std::string git_blob_sha1(std::string_view content);

/// Entry point of the `quadnet` tool. Returns 0 on success, 1 on validation
/// or usage errors, 2 on numerical failures and violated bounds.
int run_cli(const std::vector<std::string>& args);

}  // namespace quadnet
