#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "mmenc/io.hpp"
#include "mmenc/rng.hpp"

namespace mmenc {

BinaryWriter::BinaryWriter(const std::filesystem::path& path) : path_(path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw DataError("cannot open " + path.string() + " for writing");
}

void BinaryWriter::put_string(std::string_view s)
{
    put(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinaryWriter::finish()
{
    out_.flush();
    if (!out_) throw DataError("write failed for " + path_.string());
    out_.close();
}

BinaryReader::BinaryReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary)
{
    if (!in_) throw DataError("cannot open " + path.string());
}

void BinaryReader::read_raw(void* dst, std::size_t bytes)
{
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in_.gcount()) != bytes) throw DataError("truncated file " + path_.string());
}

void BinaryReader::expect_magic(std::string_view magic)
{
    std::string got(magic.size(), '\0');
    read_raw(got.data(), got.size());
    if (got != magic) throw DataError(path_.string() + ": bad magic, expected " + std::string(magic));
}

std::string BinaryReader::get_string()
{
    const auto len = get<std::uint32_t>();
    if (len > (1u << 24)) throw DataError(path_.string() + ": implausible string length");
    std::string s(len, '\0');
    read_raw(s.data(), len);
    return s;
}

std::size_t CsvTable::column(std::string_view name, std::string_view source) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw DataError(std::string(source) + ": missing column '" + std::string(name) + "'");
}

std::vector<std::string> split_csv_line(std::string_view line)
{
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(std::move(cur));
    return cells;
}

CsvTable read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    CsvTable table;
    std::string line;
    bool have_header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (!have_header) {
            table.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != table.header.size())
            throw DataError(fmt::format("{}:{}: expected {} fields, found {}", path.string(), lineno,
                                        table.header.size(), cells.size()));
        table.rows.push_back(std::move(cells));
    }
    if (!have_header) throw DataError(path.string() + ": empty CSV");
    return table;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : path_(path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw DataError("cannot open " + path.string() + " for writing");
    for (const auto& h : header) cell(h);
    end_row();
}

CsvWriter& CsvWriter::cell(std::string_view s)
{
    if (!first_) out_ << ',';
    first_ = false;
    if (s.find_first_of(",\"\n\r") != std::string_view::npos) {
        out_ << '"';
        for (char c : s) {
            if (c == '"') out_ << '"';
            out_ << c;
        }
        out_ << '"';
    } else {
        out_ << s;
    }
    return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(std::string_view(format_double(v))); }

CsvWriter& CsvWriter::cell(std::int64_t v) { return cell(std::string_view(fmt::format("{}", v))); }

CsvWriter& CsvWriter::empty() { return cell(std::string_view{}); }

void CsvWriter::end_row()
{
    out_ << '\n';
    first_ = true;
}

void CsvWriter::finish()
{
    out_.flush();
    if (!out_) throw DataError("write failed for " + path_.string());
    out_.close();
}

std::string format_double(double v)
{
    if (std::isnan(v)) return {};
    return fmt::format("{}", v);
}

double parse_double(std::string_view s, std::string_view what)
{
    // from_chars for double is available in libstdc++ 11.
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    while (first < last && *first == ' ') ++first;
    if (first < last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) throw DataError(fmt::format("{}: cannot parse '{}' as a number", what, s));
    return v;
}

std::int64_t parse_int(std::string_view s, std::string_view what)
{
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw DataError(fmt::format("{}: cannot parse '{}' as an integer", what, s));
    return v;
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::uint64_t file_digest(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::uint64_t h = 0xCBF29CE484222325ull;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
    }
    return h;
}

}  // namespace mmenc
