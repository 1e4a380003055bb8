#include "ecofair/io.hpp"

#include "ecofair/error.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace ecofair::io {

using nlohmann::json;

std::string format_full(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string format_sig6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
}

double parse_double(const std::string& s, const std::string& context) {
    double value = 0.0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    ECOFAIR_REQUIRE(ec == std::errc() && ptr == end, ErrorCode::SchemaError,
                    "cannot parse number '" + s + "' in " + context);
    return value;
}

std::size_t CsvTable::column(const std::string& name) const {
    auto idx = find_column(name);
    ECOFAIR_REQUIRE(idx.has_value(), ErrorCode::SchemaError, "missing CSV column '" + name + "'");
    return *idx;
}

std::optional<std::size_t> CsvTable::find_column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, const std::string& context) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += ch;
        }
    }
    ECOFAIR_REQUIRE(!quoted, ErrorCode::SchemaError, "unterminated quote in " + context);
    fields.push_back(std::move(field));
    return fields;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    ECOFAIR_REQUIRE(out.good(), ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    ECOFAIR_REQUIRE(in.good(), ErrorCode::IoError, "cannot open '" + path.string() + "'");
    return in;
}

} // namespace

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == EOF) break;
        auto fields = split_csv_line(line, path.string());
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            ECOFAIR_REQUIRE(fields.size() == table.header.size(), ErrorCode::SchemaError,
                            "row width differs from header in '" + path.string() + "'");
            table.rows.push_back(std::move(fields));
        }
    }
    ECOFAIR_REQUIRE(!first, ErrorCode::SchemaError, "empty CSV file '" + path.string() + "'");
    return table;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out = open_out(path);
    auto write_row = [&out](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << csv_escape(row[i]);
        }
        out << '\n';
    };
    write_row(header);
    for (const auto& row : rows) write_row(row);
    ECOFAIR_REQUIRE(out.good(), ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        raise(ErrorCode::SchemaError, "invalid JSON in '" + path.string() + "': " + e.what());
    }
    return j;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
    ECOFAIR_REQUIRE(out.good(), ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

std::vector<Sample> read_metadata_csv(const std::filesystem::path& path,
                                      const ClassTaxonomy& taxonomy) {
    const CsvTable table = read_csv(path);
    const std::size_t id_col = table.column("sample_id");
    const std::size_t label_col = table.column("label");
    const std::size_t age_col = table.column("age");
    const std::size_t loc_col = table.column("localization");
    const std::size_t sub_col = table.column("subgroup");
    const auto fold_col = table.find_column("fold");

    std::vector<Sample> samples;
    std::unordered_set<std::string> seen_ids;
    for (const auto& row : table.rows) {
        Sample s;
        s.id = row[id_col];
        ECOFAIR_REQUIRE(!s.id.empty(), ErrorCode::SchemaError, "empty sample_id in metadata");
        ECOFAIR_REQUIRE(seen_ids.insert(s.id).second, ErrorCode::DuplicateSampleId,
                        "duplicate sample_id '" + s.id + "'");

        const std::string& label = row[label_col];
        auto idx = taxonomy.index_of(label);
        if (!idx.has_value()) {
            // Fallback: a bare class index is accepted as well.
            std::size_t numeric = 0;
            auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), numeric);
            if (ec == std::errc() && ptr == label.data() + label.size() &&
                numeric < taxonomy.num_classes()) {
                idx = numeric;
            }
        }
        ECOFAIR_REQUIRE(idx.has_value(), ErrorCode::UnknownLabel,
                        "label '" + label + "' for sample '" + s.id +
                            "' is not in the taxonomy");
        s.label = *idx;

        if (!row[age_col].empty()) {
            const double age = parse_double(row[age_col], "age of '" + s.id + "'");
            ECOFAIR_REQUIRE(std::isfinite(age) && age >= 0.0, ErrorCode::SchemaError,
                            "age of '" + s.id + "' must be finite and >= 0");
            s.age = age;
        }
        if (!row[loc_col].empty()) s.localization = row[loc_col];
        if (!row[sub_col].empty()) s.subgroup = row[sub_col];
        if (fold_col.has_value() && !row[*fold_col].empty()) {
            const double fold = parse_double(row[*fold_col], "fold of '" + s.id + "'");
            ECOFAIR_REQUIRE(fold >= 0.0 && fold == static_cast<int>(fold), ErrorCode::SchemaError,
                            "fold of '" + s.id + "' must be a non-negative integer");
            s.fold = static_cast<int>(fold);
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

void write_metadata_csv(const std::filesystem::path& path, const std::vector<Sample>& samples,
                        const ClassTaxonomy& taxonomy) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(samples.size());
    for (const Sample& s : samples) {
        ECOFAIR_REQUIRE(s.label < taxonomy.num_classes(), ErrorCode::UnknownLabel,
                        "sample '" + s.id + "' has an out-of-range label");
        rows.push_back({s.id, taxonomy.class_names[s.label],
                        s.age ? format_full(*s.age) : std::string(),
                        s.localization.value_or(""), s.subgroup.value_or(""),
                        s.fold ? std::to_string(*s.fold) : std::string()});
    }
    write_csv(path, {"sample_id", "label", "age", "localization", "subgroup", "fold"}, rows);
}

IdMatrix read_matrix_csv(const std::filesystem::path& path, const std::string& prefix) {
    const CsvTable table = read_csv(path);
    ECOFAIR_REQUIRE(!table.header.empty() && table.header.front() == "sample_id",
                    ErrorCode::SchemaError,
                    "first column of '" + path.string() + "' must be sample_id");
    for (std::size_t i = 1; i < table.header.size(); ++i) {
        const std::string expected = prefix + std::to_string(i - 1);
        ECOFAIR_REQUIRE(table.header[i] == expected, ErrorCode::SchemaError,
                        "expected column '" + expected + "' in '" + path.string() + "'");
    }
    IdMatrix m;
    for (const auto& row : table.rows) {
        m.ids.push_back(row.front());
        std::vector<double> values;
        values.reserve(row.size() - 1);
        for (std::size_t i = 1; i < row.size(); ++i) {
            values.push_back(parse_double(row[i], "'" + path.string() + "' row '" + row.front() + "'"));
        }
        m.rows.push_back(std::move(values));
    }
    return m;
}

void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                      const std::vector<std::vector<double>>& rows, const std::string& prefix) {
    ECOFAIR_REQUIRE(ids.size() == rows.size(), ErrorCode::LengthMismatch,
                    "ids and rows differ in length");
    const std::size_t width = rows.empty() ? 0 : rows.front().size();
    std::vector<std::string> header{"sample_id"};
    for (std::size_t i = 0; i < width; ++i) header.push_back(prefix + std::to_string(i));
    std::vector<std::vector<std::string>> text_rows;
    text_rows.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        ECOFAIR_REQUIRE(rows[r].size() == width, ErrorCode::LengthMismatch,
                        "ragged matrix rows");
        std::vector<std::string> row{ids[r]};
        for (double v : rows[r]) row.push_back(format_full(v));
        text_rows.push_back(std::move(row));
    }
    write_csv(path, header, text_rows);
}

std::vector<EncoderProfile> read_profiles_json(const std::filesystem::path& path) {
    const json j = read_json_file(path);
    ECOFAIR_REQUIRE(j.is_array(), ErrorCode::SchemaError,
                    "profiles file must hold a JSON array");
    std::vector<EncoderProfile> profiles;
    for (const json& e : j) {
        EncoderProfile p;
        try {
            p.encoder_id = e.at("encoder_id").get<std::string>();
            p.tier = tier_from_string(e.at("tier").get<std::string>());
            p.energy_per_sample_j = e.at("energy_per_sample_j").get<double>();
            p.latency_ms = e.value("latency_ms", 0.0);
            p.embedding_dim = e.at("embedding_dim").get<std::size_t>();
        } catch (const json::exception& ex) {
            raise(ErrorCode::SchemaError,
                  "bad encoder profile in '" + path.string() + "': " + ex.what());
        }
        validate_profile(p);
        profiles.push_back(std::move(p));
    }
    return profiles;
}

void write_profiles_json(const std::filesystem::path& path,
                         const std::vector<EncoderProfile>& profiles) {
    json j = json::array();
    for (const EncoderProfile& p : profiles) {
        j.push_back({{"encoder_id", p.encoder_id},
                     {"tier", to_string(p.tier)},
                     {"energy_per_sample_j", p.energy_per_sample_j},
                     {"latency_ms", p.latency_ms},
                     {"embedding_dim", p.embedding_dim}});
    }
    write_json_file(path, j);
}

ClassTaxonomy taxonomy_from_json(const json& j) {
    ClassTaxonomy t;
    try {
        t.class_names = j.at("class_names").get<std::vector<std::string>>();
        auto to_indices = [&t](const json& names) {
            std::vector<std::size_t> indices;
            for (const json& n : names) {
                const std::string name = n.get<std::string>();
                auto idx = t.index_of(name);
                ECOFAIR_REQUIRE(idx.has_value(), ErrorCode::UnknownLabel,
                                "taxonomy set references unknown class '" + name + "'");
                indices.push_back(*idx);
            }
            return indices;
        };
        t.safe_set = to_indices(j.at("safe"));
        t.danger_set = to_indices(j.at("danger"));
        t.malignant_set = to_indices(j.at("malignant"));
    } catch (const json::exception& e) {
        raise(ErrorCode::SchemaError, std::string("bad taxonomy JSON: ") + e.what());
    }
    return validate_taxonomy(std::move(t));
}

json taxonomy_to_json(const ClassTaxonomy& t) {
    auto names_of = [&t](const std::vector<std::size_t>& indices) {
        std::vector<std::string> names;
        for (std::size_t i : indices) names.push_back(t.class_names[i]);
        return names;
    };
    return json{{"class_names", t.class_names},
                {"safe", names_of(t.safe_set)},
                {"danger", names_of(t.danger_set)},
                {"malignant", names_of(t.malignant_set)}};
}

ClassTaxonomy read_taxonomy_json(const std::filesystem::path& path) {
    return taxonomy_from_json(read_json_file(path));
}

void write_taxonomy_json(const std::filesystem::path& path, const ClassTaxonomy& t) {
    write_json_file(path, taxonomy_to_json(t));
}

json risk_model_to_json(const risk::RiskModel& m) {
    return json{{"a_min", m.a_min},
                {"a_max", m.a_max},
                {"mal_rate", m.mal_rate},
                {"max_rate", m.max_rate},
                {"fallback_rate", m.fallback_rate},
                {"fallback_age_score", m.fallback_age_score}};
}

risk::RiskModel risk_model_from_json(const json& j) {
    risk::RiskModel m;
    try {
        m.a_min = j.at("a_min").get<double>();
        m.a_max = j.at("a_max").get<double>();
        m.mal_rate = j.at("mal_rate").get<std::map<std::string, double>>();
        m.max_rate = j.at("max_rate").get<double>();
        m.fallback_rate = j.at("fallback_rate").get<double>();
        m.fallback_age_score = j.at("fallback_age_score").get<double>();
    } catch (const json::exception& e) {
        raise(ErrorCode::SchemaError, std::string("bad risk model JSON: ") + e.what());
    }
    return m;
}

void write_risk_model_json(const std::filesystem::path& path, const risk::RiskModel& m) {
    write_json_file(path, risk_model_to_json(m));
}

risk::RiskModel read_risk_model_json(const std::filesystem::path& path) {
    return risk_model_from_json(read_json_file(path));
}

json fusion_head_to_json(const fusion::FusionHead& head) {
    json weights = json::array();
    for (std::size_t c = 0; c < head.num_classes; ++c) {
        json row = json::array();
        for (std::size_t i = 0; i < head.input_dim(); ++i) {
            row.push_back(head.weights[c * head.input_dim() + i]);
        }
        weights.push_back(std::move(row));
    }
    return json{{"pathway", fusion::to_string(head.pathway)},
                {"image_dim", head.image_dim},
                {"tab_dim", head.tab_dim},
                {"num_classes", head.num_classes},
                {"weights", std::move(weights)},
                {"bias", head.bias},
                {"fold", head.fold},
                {"seed", head.seed},
                {"epochs", head.epochs},
                {"learning_rate", head.learning_rate}};
}

fusion::FusionHead fusion_head_from_json(const json& j) {
    fusion::FusionHead head;
    try {
        head.pathway = fusion::pathway_from_string(j.at("pathway").get<std::string>());
        head.image_dim = j.at("image_dim").get<std::size_t>();
        head.tab_dim = j.at("tab_dim").get<std::size_t>();
        head.num_classes = j.at("num_classes").get<std::size_t>();
        head.bias = j.at("bias").get<std::vector<double>>();
        head.fold = j.at("fold").get<int>();
        head.seed = j.at("seed").get<std::uint64_t>();
        head.epochs = j.at("epochs").get<std::size_t>();
        head.learning_rate = j.at("learning_rate").get<double>();
        const json& weights = j.at("weights");
        ECOFAIR_REQUIRE(weights.is_array() && weights.size() == head.num_classes,
                        ErrorCode::SchemaError, "weight matrix has wrong row count");
        for (const json& row : weights) {
            const auto values = row.get<std::vector<double>>();
            ECOFAIR_REQUIRE(values.size() == head.input_dim(), ErrorCode::SchemaError,
                            "weight matrix has wrong row width");
            head.weights.insert(head.weights.end(), values.begin(), values.end());
        }
        ECOFAIR_REQUIRE(head.bias.size() == head.num_classes, ErrorCode::SchemaError,
                        "bias length does not match class count");
    } catch (const json::exception& e) {
        raise(ErrorCode::SchemaError, std::string("bad fusion head JSON: ") + e.what());
    }
    return head;
}

void write_fusion_head_json(const std::filesystem::path& path, const fusion::FusionHead& head) {
    write_json_file(path, fusion_head_to_json(head));
}

fusion::FusionHead read_fusion_head_json(const std::filesystem::path& path) {
    return fusion_head_from_json(read_json_file(path));
}

void write_decisions_csv(const std::filesystem::path& path,
                         const std::vector<FoldDecision>& decisions) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(decisions.size());
    for (const FoldDecision& fd : decisions) {
        const RouteDecision& d = fd.decision;
        rows.push_back({d.sample_id, std::to_string(fd.fold), d.gate ? "1" : "0",
                        format_full(d.entropy), format_full(d.norm_entropy),
                        format_full(d.delta), format_full(d.ambiguity),
                        d.score ? format_full(*d.score) : std::string(),
                        format_full(d.tab_risk), d.trigger_reason.label()});
    }
    write_csv(path,
              {"sample_id", "fold", "gate", "entropy", "norm_entropy", "delta", "ambiguity",
               "score", "tab_risk", "trigger_reason"},
              rows);
}

std::vector<FoldDecision> read_decisions_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    const std::vector<std::string> expected{"sample_id", "fold",      "gate",
                                            "entropy",   "norm_entropy", "delta",
                                            "ambiguity", "score",     "tab_risk",
                                            "trigger_reason"};
    ECOFAIR_REQUIRE(table.header == expected, ErrorCode::SchemaError,
                    "unexpected decisions CSV header in '" + path.string() + "'");
    std::vector<FoldDecision> out;
    for (const auto& row : table.rows) {
        FoldDecision fd;
        fd.fold = static_cast<int>(parse_double(row[1], "decisions fold"));
        RouteDecision& d = fd.decision;
        d.sample_id = row[0];
        d.gate = row[2] == "1";
        d.entropy = parse_double(row[3], "decisions entropy");
        d.norm_entropy = parse_double(row[4], "decisions norm_entropy");
        d.delta = parse_double(row[5], "decisions delta");
        d.ambiguity = parse_double(row[6], "decisions ambiguity");
        if (!row[7].empty()) d.score = parse_double(row[7], "decisions score");
        d.tab_risk = parse_double(row[8], "decisions tab_risk");
        d.trigger_reason = trigger_reasons_from_label(row[9]);
        out.push_back(std::move(fd));
    }
    return out;
}

std::vector<std::filesystem::path> write_dataset_files(const std::filesystem::path& dir,
                                                       const Dataset& d) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto emit = [&written](std::filesystem::path p) {
        written.push_back(std::move(p));
        return written.back();
    };

    write_metadata_csv(emit(dir / "metadata.csv"), d.samples, d.taxonomy);
    write_taxonomy_json(emit(dir / "taxonomy.json"), d.taxonomy);
    write_profiles_json(emit(dir / "profiles.json"), d.profiles);

    std::vector<std::string> ids;
    ids.reserve(d.samples.size());
    for (const Sample& s : d.samples) ids.push_back(s.id);
    for (const auto& [encoder_id, table] : d.encoders) {
        if (table.has_probabilities()) {
            write_matrix_csv(emit(dir / (encoder_id + "_probabilities.csv")), ids,
                             table.probabilities, "p_");
        }
        if (table.has_embeddings()) {
            write_matrix_csv(emit(dir / (encoder_id + "_embeddings.csv")), ids, table.embeddings,
                             "e_");
        }
    }
    return written;
}

namespace {

std::vector<std::vector<double>> align_rows(const IdMatrix& m,
                                            const std::vector<Sample>& samples,
                                            const std::string& context) {
    ECOFAIR_REQUIRE(m.ids.size() == samples.size(), ErrorCode::RowCountMismatch,
                    context + " has " + std::to_string(m.ids.size()) + " rows for " +
                        std::to_string(samples.size()) + " samples");
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < m.ids.size(); ++i) {
        ECOFAIR_REQUIRE(by_id.emplace(m.ids[i], i).second, ErrorCode::DuplicateSampleId,
                        "duplicate sample_id '" + m.ids[i] + "' in " + context);
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(samples.size());
    for (const Sample& s : samples) {
        auto it = by_id.find(s.id);
        ECOFAIR_REQUIRE(it != by_id.end(), ErrorCode::RowCountMismatch,
                        context + " has no row for sample '" + s.id + "'");
        rows.push_back(m.rows[it->second]);
    }
    return rows;
}

} // namespace

Dataset load_dataset(
    const std::filesystem::path& metadata_path,
    const std::map<std::string, std::pair<std::string, std::string>>& encoder_paths,
    const std::filesystem::path& profiles_path, const ClassTaxonomy& taxonomy) {
    Dataset d;
    d.taxonomy = validate_taxonomy(taxonomy);
    d.samples = read_metadata_csv(metadata_path, d.taxonomy);
    d.profiles = read_profiles_json(profiles_path);

    for (const auto& [encoder_id, paths] : encoder_paths) {
        EncoderTable table;
        if (!paths.first.empty()) {
            const IdMatrix m = read_matrix_csv(paths.first, "p_");
            auto rows = align_rows(m, d.samples, "probabilities of '" + encoder_id + "'");
            for (auto& row : rows) {
                table.probabilities.push_back(validate_distribution(std::move(row)).probs);
            }
        }
        if (!paths.second.empty()) {
            const IdMatrix m = read_matrix_csv(paths.second, "e_");
            table.embeddings = align_rows(m, d.samples, "embeddings of '" + encoder_id + "'");
        }
        d.encoders[encoder_id] = std::move(table);
    }
    d.check();
    return d;
}

} // namespace ecofair::io
