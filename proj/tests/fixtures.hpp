#pragma once

#include "decmetrics/claims.hpp"

#include <chrono>
#include <filesystem>
#include <random>
#include <string>

namespace fixtures {

using decmetrics::Claim;
using decmetrics::DecompositionTree;

inline DecompositionTree leaf(const std::string& text) { return DecompositionTree(Claim(text)); }

inline DecompositionTree node(const std::string& text, std::vector<DecompositionTree> children) {
    return DecompositionTree(Claim(text), std::move(children));
}

// c -> [ac1 -> [ac1.1, ac1.2], ac2, ac3]
inline DecompositionTree figure_tree() {
    return node("c", {node("ac1", {leaf("ac1.1"), leaf("ac1.2")}), leaf("ac2"), leaf("ac3")});
}

// Same shape with distinct, readable texts.
inline DecompositionTree figure_tree_words() {
    return node("Mira paints murals and teaches art in Oslo and Bergen.",
                {node("Mira paints murals and teaches art.",
                      {leaf("Mira paints murals."), leaf("Mira teaches art.")}),
                 leaf("Mira works in Oslo."), leaf("Mira works in Bergen.")});
}

// Distinct name per test run.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("decmetrics-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Random tree with exactly `leaf_count` leaves; internal fan-out in [2, 3].
inline DecompositionTree random_tree(std::mt19937& gen, int leaf_count, int& label) {
    if (leaf_count == 1) return leaf("n" + std::to_string(label++));
    const auto name = "n" + std::to_string(label++);
    int max_parts = std::min(3, leaf_count);
    int parts = std::uniform_int_distribution<int>(2, max_parts)(gen);
    std::vector<int> sizes(parts, 1);
    for (int extra = leaf_count - parts; extra > 0; --extra)
        sizes[std::uniform_int_distribution<int>(0, parts - 1)(gen)]++;
    std::vector<DecompositionTree> kids;
    for (int s : sizes) kids.push_back(random_tree(gen, s, label));
    return node(name, std::move(kids));
}

} // namespace fixtures
