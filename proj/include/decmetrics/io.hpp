#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace decmetrics::io {

// Whole file as bytes; throws ValidationError if unreadable.
std::string read_file(const std::filesystem::path& path);

// Non-blank lines with 1-based line numbers.
struct Line {
    std::size_t number;
    std::string text;
};
std::vector<Line> read_nonblank_lines(const std::filesystem::path& path);

// Writes to a sibling temporary and renames it over the target on commit().
// An uncommitted file is removed on destruction, so failed runs never leave
// partial outputs behind.
class AtomicFile {
public:
    explicit AtomicFile(std::filesystem::path target);
    AtomicFile(AtomicFile&&) noexcept;
    AtomicFile& operator=(AtomicFile&&) = delete;
    AtomicFile(const AtomicFile&) = delete;
    AtomicFile& operator=(const AtomicFile&) = delete;
    ~AtomicFile();

    void write(std::string_view bytes);
    void commit();

    const std::filesystem::path& target() const noexcept { return target_; }

private:
    std::filesystem::path target_;
    std::filesystem::path temp_;
    std::string buffer_;
    bool committed_ = false;
};

// Convenience for single-shot outputs.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

} // namespace decmetrics::io
