#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace hallsand::csv {

/// Splits one CSV record on commas. Fields are trimmed of surrounding
/// whitespace; quoting is not supported (none of our formats need it).
std::vector<std::string_view> split(std::string_view line);

std::optional<double> parse_double(std::string_view field);
std::optional<std::int64_t> parse_int(std::string_view field);

/// Shortest decimal representation that round-trips to the same double.
std::string format(double value);

/// Reads every line of a file, dropping a trailing '\r' from each.
/// Throws InputError when the file cannot be opened.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Minimal row writer. Values are emitted with `format` so output bytes are
/// a pure function of the values.
class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void header(std::initializer_list<std::string_view> columns);
    Writer& field(std::string_view text);
    Writer& field(double value);
    Writer& field(std::int64_t value);
    Writer& field(std::uint64_t value);
    Writer& field(int value) { return field(static_cast<std::int64_t>(value)); }
    Writer& field(bool value) { return field(std::string_view(value ? "true" : "false")); }
    void end_row();

private:
    std::ostream& out_;
    bool first_ = true;
};

}  // namespace hallsand::csv
