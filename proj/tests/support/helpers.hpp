#pragma once

#include <chrono>
#include <filesystem>
#include <random>
#include <string>

#include "hwc/form_model.hpp"

namespace test_support {

#ifndef HWC_FIXTURE_DIR
#error "HWC_FIXTURE_DIR must be defined by the build"
#endif

inline std::string fixture_path(const std::string& rel) {
    return std::string(HWC_FIXTURE_DIR) + "/" + rel;
}

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        std::mt19937_64 rng(std::random_device{}());
        dir_ = base / ("hwc_test_" + std::to_string(rng()));
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

private:
    std::filesystem::path dir_;
};

inline hwc::WebPage make_page(std::string body, std::string url = "http://fixture.test/page",
                              int status = 200) {
    hwc::WebPage page;
    page.url = std::move(url);
    page.body = std::move(body);
    page.status = status;
    page.fetched_at = std::chrono::system_clock::now();
    return page;
}

}  // namespace test_support
