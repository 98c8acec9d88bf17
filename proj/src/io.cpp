#include "decmetrics/io.hpp"

#include "decmetrics/errors.hpp"
#include "decmetrics/text.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace decmetrics::io {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<Line> read_nonblank_lines(const std::filesystem::path& path) {
    auto lines = text::split_lines(read_file(path));
    std::vector<Line> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        out.push_back({i + 1, std::move(lines[i])});
    }
    return out;
}

namespace {
std::filesystem::path temp_path_for(const std::filesystem::path& target) {
    static std::atomic<unsigned> counter{0};
    auto name = target.filename().string() + ".tmp." + std::to_string(::getpid()) + "." +
                std::to_string(counter++);
    return target.parent_path() / name;
}
} // namespace

AtomicFile::AtomicFile(std::filesystem::path target)
    : target_(std::move(target)), temp_(temp_path_for(target_)) {}

AtomicFile::AtomicFile(AtomicFile&& other) noexcept
    : target_(std::move(other.target_)),
      temp_(std::move(other.temp_)),
      buffer_(std::move(other.buffer_)),
      committed_(other.committed_) {
    other.committed_ = true;
}

AtomicFile::~AtomicFile() {
    if (!committed_) {
        std::error_code ec;
        std::filesystem::remove(temp_, ec);
    }
}

void AtomicFile::write(std::string_view bytes) {
    buffer_.append(bytes);
}

void AtomicFile::commit() {
    if (committed_) return;
    {
        std::ofstream out(temp_, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + temp_.string());
        out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
        out.flush();
        if (!out) throw ValidationError("write failed for " + temp_.string());
    }
    std::error_code ec;
    std::filesystem::rename(temp_, target_, ec);
    if (ec) {
        std::filesystem::remove(temp_, ec);
        throw ValidationError("cannot move output into place: " + target_.string());
    }
    committed_ = true;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    AtomicFile f(path);
    f.write(bytes);
    f.commit();
}

} // namespace decmetrics::io
