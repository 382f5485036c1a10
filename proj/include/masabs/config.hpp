#pragma once

// Line-based `key = value` reader shared by the abstraction and bench
// configs. Values are a quoted string, an integer, or a bracketed list of
// those; `#` starts a comment outside strings; `[[name]]` opens a block.

#include <stdexcept>
#include <string>
#include <vector>

namespace masabs {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfigEntry {
    int line = 0;
    std::string block;  // non-empty for a `[[block]]` header line; key and items are then empty
    std::string key;
    std::vector<std::string> items;  // strings unquoted, integers as text
    bool list = false;

    /// The single scalar; throws ConfigError for lists.
    const std::string& one() const;
    int integer() const;
    std::vector<int> integers() const;
    /// "lo..hi"
    std::pair<int, int> range() const;
    [[noreturn]] void fail(const std::string& msg) const;
};

std::vector<ConfigEntry> read_config(const std::string& text);
std::string read_file(const std::string& path);

}  // namespace masabs
