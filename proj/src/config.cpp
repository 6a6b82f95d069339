#include "grk/config.hpp"

#include "grk/error.hpp"
#include "grk/text.hpp"

namespace grk {

KeyValueConfig KeyValueConfig::parse(const std::string& text)
{
    KeyValueConfig cfg;
    std::size_t line_no = 0;
    for (std::string_view line : text::split(text, '\n')) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = text::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            fail_data("config line " + std::to_string(line_no) + ": expected 'key = value'");
        auto key = text::trim(line.substr(0, eq));
        auto value = text::trim(line.substr(eq + 1));
        if (key.empty()) fail_data("config line " + std::to_string(line_no) + ": empty key");
        cfg.values_[std::string(key)] = std::string(value);
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path)
{
    return parse(text::read_file(path));
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const
{
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const
{
    return get(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const
{
    auto v = get(key);
    return v ? text::parse_double(*v, key) : fallback;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const
{
    auto v = get(key);
    return v ? text::parse_int(*v, key) : fallback;
}

std::map<std::string, std::string> KeyValueConfig::with_prefix(const std::string& prefix) const
{
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : values_)
        if (k.size() > prefix.size() && k.compare(0, prefix.size(), prefix) == 0)
            out[k.substr(prefix.size())] = v;
    return out;
}

} // namespace grk
