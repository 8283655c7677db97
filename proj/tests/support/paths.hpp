#pragma once

#include <filesystem>
#include <string>

#ifndef EWARN_DATA_DIR
#error "EWARN_DATA_DIR must be defined by the build"
#endif

namespace testsup {

inline std::string data_path(const std::string& name) {
    return (std::filesystem::path(EWARN_DATA_DIR) / name).string();
}

/// Fresh scratch directory under the system temp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        base_ = std::filesystem::temp_directory_path() / ("ewarn_test_" + tag + "_" + std::to_string(counter()++));
        std::filesystem::remove_all(base_);
        std::filesystem::create_directories(base_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(base_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string path(const std::string& name = "") const {
        return name.empty() ? base_.string() : (base_ / name).string();
    }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::filesystem::path base_;
};

} // namespace testsup
