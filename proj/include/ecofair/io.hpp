#pragma once

#include "ecofair/dataset.hpp"
#include "ecofair/fusion.hpp"
#include "ecofair/risk.hpp"
#include "ecofair/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <string>
#include <vector>

// File contracts. Data and model files keep full precision (shortest
// round-trip formatting); report files condense numbers to 6 significant
// digits. All emitted files have deterministic row and key order.
namespace ecofair::io {

std::string format_full(double v);
std::string format_sig6(double v);
double parse_double(const std::string& s, const std::string& context);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const; // throws SchemaError when absent
    std::optional<std::size_t> find_column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

// metadata CSV: sample_id,label,age,localization,subgroup,fold
// Empty cell = missing; label cells are class names (an integer index into
// the taxonomy is also accepted); the fold column is optional.
std::vector<Sample> read_metadata_csv(const std::filesystem::path& path,
                                      const ClassTaxonomy& taxonomy);
void write_metadata_csv(const std::filesystem::path& path, const std::vector<Sample>& samples,
                        const ClassTaxonomy& taxonomy);

// encoder matrix CSV: sample_id,<prefix>0,...,<prefix>{w-1}; rows aligned to
// the metadata by sample_id ("p_" for probabilities, "e_" for embeddings).
struct IdMatrix {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;
};

IdMatrix read_matrix_csv(const std::filesystem::path& path, const std::string& prefix);
void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                      const std::vector<std::vector<double>>& rows, const std::string& prefix);

// encoder profiles JSON: list of
// {encoder_id, tier, energy_per_sample_j, latency_ms, embedding_dim}
std::vector<EncoderProfile> read_profiles_json(const std::filesystem::path& path);
void write_profiles_json(const std::filesystem::path& path,
                         const std::vector<EncoderProfile>& profiles);

// taxonomy JSON: {class_names, safe, danger, malignant}; sets hold class names.
ClassTaxonomy taxonomy_from_json(const nlohmann::json& j);
nlohmann::json taxonomy_to_json(const ClassTaxonomy& t);
ClassTaxonomy read_taxonomy_json(const std::filesystem::path& path);
void write_taxonomy_json(const std::filesystem::path& path, const ClassTaxonomy& t);

// risk model JSON: {a_min, a_max, mal_rate, max_rate, fallback_rate,
// fallback_age_score}
nlohmann::json risk_model_to_json(const risk::RiskModel& m);
risk::RiskModel risk_model_from_json(const nlohmann::json& j);
void write_risk_model_json(const std::filesystem::path& path, const risk::RiskModel& m);
risk::RiskModel read_risk_model_json(const std::filesystem::path& path);

// fusion head JSON: row-major weight matrix, bias, pathway, dims, fold, seed
nlohmann::json fusion_head_to_json(const fusion::FusionHead& head);
fusion::FusionHead fusion_head_from_json(const nlohmann::json& j);
void write_fusion_head_json(const std::filesystem::path& path, const fusion::FusionHead& head);
fusion::FusionHead read_fusion_head_json(const std::filesystem::path& path);

// decisions CSV:
// sample_id,fold,gate,entropy,norm_entropy,delta,ambiguity,score,tab_risk,trigger_reason
struct FoldDecision {
    int fold = 0;
    RouteDecision decision;
};

void write_decisions_csv(const std::filesystem::path& path,
                         const std::vector<FoldDecision>& decisions);
std::vector<FoldDecision> read_decisions_csv(const std::filesystem::path& path);

// Emits every file a run consumes for one dataset: metadata.csv,
// taxonomy.json, profiles.json and per-encoder probability/embedding CSVs.
// Returns the list of written files.
std::vector<std::filesystem::path> write_dataset_files(const std::filesystem::path& dir,
                                                       const Dataset& d);

// Loads a dataset from exported files; taxonomy validation, sample_id
// alignment and matrix width checks included.
Dataset load_dataset(const std::filesystem::path& metadata_path,
                     const std::map<std::string, std::pair<std::string, std::string>>&
                         encoder_paths, // id -> (probabilities path, embeddings path); "" = absent
                     const std::filesystem::path& profiles_path, const ClassTaxonomy& taxonomy);

} // namespace ecofair::io
