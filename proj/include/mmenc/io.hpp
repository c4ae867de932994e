#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "mmenc/error.hpp"

namespace mmenc {

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian and are written without byte swapping");

/// Little-endian binary writer for the NRSP/NFEA/NSCR/NSIG containers.
class BinaryWriter
{
public:
    explicit BinaryWriter(const std::filesystem::path& path);

    template <class T>
        requires std::is_arithmetic_v<T>
    void put(T value)
    {
        out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
    }

    template <class T>
        requires std::is_arithmetic_v<T>
    void put_array(std::span<const T> values)
    {
        out_.write(reinterpret_cast<const char*>(values.data()),
                   static_cast<std::streamsize>(values.size_bytes()));
    }

    void put_magic(std::string_view magic) { out_.write(magic.data(), static_cast<std::streamsize>(magic.size())); }

    /// u32 byte length followed by UTF-8 bytes.
    void put_string(std::string_view s);

    /// Flush and throw DataError if anything failed.
    void finish();

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

class BinaryReader
{
public:
    explicit BinaryReader(const std::filesystem::path& path);

    template <class T>
        requires std::is_arithmetic_v<T>
    T get()
    {
        T value{};
        read_raw(&value, sizeof(T));
        return value;
    }

    template <class T>
        requires std::is_arithmetic_v<T>
    void get_array(std::span<T> out)
    {
        read_raw(out.data(), out.size_bytes());
    }

    void expect_magic(std::string_view magic);
    std::string get_string();
    const std::filesystem::path& path() const { return path_; }

private:
    void read_raw(void* dst, std::size_t bytes);

    std::filesystem::path path_;
    std::ifstream in_;
};

/// Minimal RFC-4180 style CSV: comma separated, '"' quoting, header row.
struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; DataError naming `source` if absent.
    std::size_t column(std::string_view name, std::string_view source) const;
};

CsvTable read_csv(const std::filesystem::path& path);
std::vector<std::string> split_csv_line(std::string_view line);

class CsvWriter
{
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& cell(std::string_view s);
    CsvWriter& cell(const char* s) { return cell(std::string_view(s)); }
    CsvWriter& cell(const std::string& s) { return cell(std::string_view(s)); }
    CsvWriter& cell(double v);
    CsvWriter& cell(std::int64_t v);
    CsvWriter& cell(int v) { return cell(static_cast<std::int64_t>(v)); }
    CsvWriter& cell(std::size_t v) { return cell(static_cast<std::int64_t>(v)); }
    CsvWriter& cell(bool v) { return cell(std::int64_t{v ? 1 : 0}); }
    CsvWriter& empty();
    void end_row();
    void finish();

private:
    std::filesystem::path path_;
    std::ofstream out_;
    bool first_ = true;
};

/// Shortest round-trip decimal representation; NaN prints as an empty string.
std::string format_double(double v);
double parse_double(std::string_view s, std::string_view what);
std::int64_t parse_int(std::string_view s, std::string_view what);

/// 16 lower-case hex digits.
std::string hex64(std::uint64_t v);

/// FNV-1a digest of a file's bytes.
std::uint64_t file_digest(const std::filesystem::path& path);

}  // namespace mmenc
