#include "fixtures.hpp"

#include <fstream>
#include <sstream>
#include <unistd.h>

namespace fixture {

cshap::Dataset ramp(int hours, const std::vector<std::string>& covariates, cshap::Timestamp start) {
  std::vector<cshap::Value> load;
  for (int i = 0; i < hours; ++i) load.emplace_back(1000.0 + i);
  std::vector<cshap::CovariateSeries> covs;
  for (std::size_t c = 0; c < covariates.size(); ++c) {
    std::vector<cshap::Value> v;
    for (int i = 0; i < hours; ++i) v.emplace_back(10.0 * static_cast<double>(c + 1) + i % 24);
    covs.push_back({cshap::HourlySeries(covariates[c], start, v), true});
  }
  return cshap::Dataset(cshap::HourlySeries("load", start, load, "MW"), covs);
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("coalition_shap_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fixture
