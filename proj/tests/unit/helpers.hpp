#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "tpad/rng.hpp"
#include "tpad/types.hpp"

namespace test_helpers {

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("tpad_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path file(const std::string& name) const { return path / name; }

    static int& counter() {
        static int c = 0;
        return c;
    }
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline tpad::Matrix random_matrix(tpad::Rng& rng, tpad::Index rows, tpad::Index cols,
                                  double std = 1.0) {
    tpad::Matrix m(rows, cols);
    for (tpad::Index i = 0; i < rows; ++i) {
        for (tpad::Index j = 0; j < cols; ++j) m(i, j) = rng.gaussian(0.0, std);
    }
    return m;
}

} // namespace test_helpers
