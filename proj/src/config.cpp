#include "masabs/config.hpp"

#include <fstream>
#include <sstream>

namespace masabs {

namespace {

std::string trim(const std::string& x) {
    const auto b = x.find_first_not_of(" \t\r");
    const auto e = x.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : x.substr(b, e - b + 1);
}

int parse_int(const std::string& s, const ConfigEntry& at) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    at.fail("expected an integer, got '" + s + "'");
}

}  // namespace

void ConfigEntry::fail(const std::string& msg) const {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

const std::string& ConfigEntry::one() const {
    if (list || items.size() != 1) fail("'" + key + "' takes a single value");
    return items[0];
}

int ConfigEntry::integer() const { return parse_int(one(), *this); }

std::vector<int> ConfigEntry::integers() const {
    std::vector<int> out;
    for (const auto& x : items) out.push_back(parse_int(x, *this));
    return out;
}

std::pair<int, int> ConfigEntry::range() const {
    const auto& s = one();
    const auto dots = s.find("..");
    if (dots == std::string::npos) fail("'" + key + "' is lo..hi");
    return {parse_int(trim(s.substr(0, dots)), *this), parse_int(trim(s.substr(dots + 2)), *this)};
}

std::vector<ConfigEntry> read_config(const std::string& text) {
    std::vector<ConfigEntry> out;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        bool in_str = false;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '"') in_str = !in_str;
            if (raw[i] == '#' && !in_str) {
                raw.resize(i);
                break;
            }
        }
        const std::string s = trim(raw);
        if (s.empty()) continue;
        ConfigEntry e;
        e.line = line;
        if (s.size() > 4 && s.starts_with("[[") && s.ends_with("]]")) {
            e.block = trim(s.substr(2, s.size() - 4));
            out.push_back(std::move(e));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) e.fail("expected key = value");
        e.key = trim(s.substr(0, eq));
        std::string v = trim(s.substr(eq + 1));
        if (e.key.empty()) e.fail("missing key");
        if (v.empty()) e.fail("missing value");
        auto scalar = [&](std::string x) {
            x = trim(x);
            if (x.size() >= 2 && x.front() == '"' && x.back() == '"') return x.substr(1, x.size() - 2);
            if (x.empty() || x.find_first_not_of("-0123456789") != std::string::npos)
                e.fail("expected a quoted string or an integer, got '" + x + "'");
            return x;
        };
        if (v.front() == '[') {
            if (v.back() != ']') e.fail("unterminated list");
            e.list = true;
            const std::string body = trim(v.substr(1, v.size() - 2));
            if (!body.empty()) {
                std::string cur;
                bool quoted = false;
                for (char ch : body + ",") {
                    if (ch == '"') quoted = !quoted;
                    if (ch == ',' && !quoted) {
                        e.items.push_back(scalar(cur));
                        cur.clear();
                    } else {
                        cur += ch;
                    }
                }
            }
        } else {
            e.items.push_back(scalar(v));
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace masabs
