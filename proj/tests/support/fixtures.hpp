#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "coalition_shap/data_model.hpp"

namespace fixture {

inline cshap::Timestamp at(const char* text) { return cshap::parse_timestamp(text); }

/// Load 1000 + i at hour i; covariate c has value 10 * (c + 1) + (i % 24).
cshap::Dataset ramp(int hours, const std::vector<std::string>& covariates = {},
                    cshap::Timestamp start = at("2024-01-01T00:00:00Z"));

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace fixture
