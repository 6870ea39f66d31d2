#pragma once

#include <filesystem>
#include <string>

#include "gwflow/case_io.hpp"

#ifndef GWFLOW_SOURCE_DIR
#error "GWFLOW_SOURCE_DIR must be defined"
#endif

inline std::filesystem::path source_path(const std::string& rel)
{
    return std::filesystem::path(GWFLOW_SOURCE_DIR) / rel;
}

inline std::string test_data(const std::string& name)
{
    return gwflow::read_text_file(source_path("tests/data/" + name));
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("gwflow_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}
