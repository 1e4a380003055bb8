#pragma once

#include "ecofair/dataset.hpp"
#include "ecofair/rng.hpp"
#include "ecofair/types.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <unistd.h>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace ecofair::test {

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("ecofair_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline std::map<std::string, std::string> snapshot_dir(const std::filesystem::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file()) {
            files[std::filesystem::relative(entry.path(), dir).string()] = slurp(entry.path());
        }
    }
    return files;
}

inline ClassTaxonomy binary_taxonomy() {
    ClassTaxonomy t;
    t.class_names = {"benign", "malignant"};
    t.safe_set = {0};
    t.danger_set = {1};
    t.malignant_set = {1};
    return validate_taxonomy(std::move(t));
}

inline ClassTaxonomy ham_style_taxonomy() {
    ClassTaxonomy t;
    t.class_names = {"nv", "bkl", "df", "vasc", "mel", "bcc", "akiec"};
    t.safe_set = {0, 1, 2, 3};
    t.danger_set = {4, 5, 6};
    t.malignant_set = {4, 5, 6};
    return validate_taxonomy(std::move(t));
}

inline Sample make_sample(std::string id, std::size_t label, std::optional<double> age = {},
                          std::optional<std::string> loc = {},
                          std::optional<std::string> subgroup = {}) {
    Sample s;
    s.id = std::move(id);
    s.label = label;
    s.age = age;
    s.localization = std::move(loc);
    s.subgroup = std::move(subgroup);
    return s;
}

// Dirichlet(1) draw: a uniformly random point on the simplex.
inline std::vector<double> random_distribution(Rng& rng, std::size_t num_classes) {
    std::vector<double> p(num_classes);
    double sum = 0.0;
    for (double& v : p) {
        v = -std::log(std::max(rng.uniform01(), 1e-300));
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

} // namespace ecofair::test
