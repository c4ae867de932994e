#include "mmenc/feature_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "mmenc/error.hpp"
#include "mmenc/io.hpp"

namespace mmenc {

std::string_view to_string(ModalityClass c)
{
    switch (c) {
    case ModalityClass::MultimodalTrained: return "MultimodalTrained";
    case ModalityClass::MultimodalArchitectural: return "MultimodalArchitectural";
    case ModalityClass::UnimodalLanguage: return "UnimodalLanguage";
    case ModalityClass::UnimodalVision: return "UnimodalVision";
    case ModalityClass::LinearIntegration: return "LinearIntegration";
    }
    return "?";
}

ModalityClass parse_modality_class(std::string_view s)
{
    for (auto c : {ModalityClass::MultimodalTrained, ModalityClass::MultimodalArchitectural,
                   ModalityClass::UnimodalLanguage, ModalityClass::UnimodalVision, ModalityClass::LinearIntegration})
        if (to_string(c) == s) return c;
    throw DataError(fmt::format("unknown modality_class '{}'", s));
}

void write_features(const std::filesystem::path& path, const FeatureMatrix& f, std::uint64_t config_hash)
{
    BinaryWriter w(path);
    w.put_magic("NFEA");
    w.put(kFeatureFormatVersion);
    w.put(config_hash);
    w.put_string(f.model_id);
    w.put_string(f.layer_id);
    w.put(static_cast<std::uint64_t>(f.n_events()));
    w.put(static_cast<std::uint64_t>(f.dim()));
    w.put(static_cast<std::uint32_t>(FeatureDtype::F32));
    w.put(f.seed);
    w.put(static_cast<std::uint8_t>(f.projected ? 1 : 0));
    std::vector<float> row(static_cast<std::size_t>(f.dim()));
    for (Eigen::Index i = 0; i < f.n_events(); ++i) {
        for (Eigen::Index j = 0; j < f.dim(); ++j) row[static_cast<std::size_t>(j)] = static_cast<float>(f.values(i, j));
        w.put_array(std::span<const float>(row));
    }
    w.finish();
}

namespace {

FeatureHeader read_header(BinaryReader& r)
{
    r.expect_magic("NFEA");
    const auto version = r.get<std::uint32_t>();
    if (version != kFeatureFormatVersion)
        throw DataError(fmt::format("{}: unsupported NFEA version {}", r.path().string(), version));
    (void)r.get<std::uint64_t>();  // config hash
    FeatureHeader h;
    h.model_id = r.get_string();
    h.layer_id = r.get_string();
    h.n = r.get<std::uint64_t>();
    h.dim = r.get<std::uint64_t>();
    const auto dtype = r.get<std::uint32_t>();
    if (dtype != 1 && dtype != 2) throw DataError(fmt::format("{}: unknown dtype code {}", r.path().string(), dtype));
    h.dtype = static_cast<FeatureDtype>(dtype);
    h.seed = r.get<std::uint64_t>();
    h.projected = r.get<std::uint8_t>() != 0;
    if (h.n > (1u << 28) || h.dim > (std::uint64_t{1} << 36))
        throw DataError(r.path().string() + ": implausible NFEA dimensions");
    return h;
}

}  // namespace

FeatureHeader read_feature_header(const std::filesystem::path& path)
{
    BinaryReader r(path);
    return read_header(r);
}

FeatureMatrix read_features(const std::filesystem::path& path)
{
    BinaryReader r(path);
    const auto h = read_header(r);
    FeatureMatrix f;
    f.model_id = h.model_id;
    f.layer_id = h.layer_id;
    f.seed = h.seed;
    f.projected = h.projected;
    f.values.resize(static_cast<Eigen::Index>(h.n), static_cast<Eigen::Index>(h.dim));
    if (h.dtype == FeatureDtype::F32) {
        std::vector<float> row(h.dim);
        for (std::uint64_t i = 0; i < h.n; ++i) {
            r.get_array(std::span<float>(row));
            for (std::uint64_t j = 0; j < h.dim; ++j)
                f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        }
    } else {
        std::vector<double> row(h.dim);
        for (std::uint64_t i = 0; i < h.n; ++i) {
            r.get_array(std::span<double>(row));
            for (std::uint64_t j = 0; j < h.dim; ++j)
                f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        }
    }
    return f;
}

FeatureMatrix read_features_csv(const std::filesystem::path& path, std::string model_id, std::string layer_id)
{
    const auto t = read_csv(path);
    FeatureMatrix f;
    f.model_id = std::move(model_id);
    f.layer_id = std::move(layer_id);
    f.values.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (std::size_t j = 0; j < t.header.size(); ++j)
            f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                parse_double(t.rows[i][j], path.string());
    return f;
}

std::vector<ModelSpec> FeatureManifest::models() const
{
    std::vector<ModelSpec> out;
    for (const auto& e : entries) {
        auto it = std::find_if(out.begin(), out.end(), [&](const ModelSpec& m) { return m.model_id == e.model_id; });
        if (it == out.end()) out.push_back({e.model_id, e.modality, e.trained});
    }
    return out;
}

std::vector<const ManifestEntry*> FeatureManifest::layers_of(const std::string& model_id) const
{
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries)
        if (e.model_id == model_id) out.push_back(&e);
    return out;
}

FeatureManifest read_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(fmt::format("{}: {}", path.string(), e.what()));
    }
    const auto base = path.parent_path();
    FeatureManifest m;
    std::set<std::pair<std::string, std::string>> seen;
    try {
        for (const auto& e : j.at("entries")) {
            ManifestEntry entry;
            entry.model_id = e.at("model_id").get<std::string>();
            entry.layer_id = e.at("layer_id").get<std::string>();
            std::filesystem::path p = e.at("path").get<std::string>();
            entry.path = p.is_absolute() ? p : base / p;
            entry.modality = parse_modality_class(e.at("modality_class").get<std::string>());
            entry.trained = e.at("trained").get<bool>();
            if (!seen.insert({entry.model_id, entry.layer_id}).second)
                throw DataError(fmt::format("{}: duplicate entry {}/{}", path.string(), entry.model_id, entry.layer_id));
            for (const auto& other : m.entries)
                if (other.model_id == entry.model_id &&
                    (other.modality != entry.modality || other.trained != entry.trained))
                    throw DataError(fmt::format("{}: inconsistent modality_class/trained for model {}", path.string(),
                                                entry.model_id));
            m.entries.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return m;
}

void write_manifest(const std::filesystem::path& path, const FeatureManifest& manifest)
{
    nlohmann::json entries = nlohmann::json::array();
    const auto base = path.parent_path();
    for (const auto& e : manifest.entries) {
        auto rel = e.path.is_absolute() ? std::filesystem::relative(e.path, base) : e.path;
        entries.push_back({{"model_id", e.model_id},
                           {"layer_id", e.layer_id},
                           {"path", rel.generic_string()},
                           {"modality_class", std::string(to_string(e.modality))},
                           {"trained", e.trained}});
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    out << nlohmann::json{{"entries", entries}}.dump(2) << '\n';
    if (!out) throw DataError("write failed for " + path.string());
}

FeatureMatrix load_feature_entry(const ManifestEntry& entry)
{
    FeatureMatrix f = entry.path.extension() == ".csv" ? read_features_csv(entry.path, entry.model_id, entry.layer_id)
                                                       : read_features(entry.path);
    if (f.model_id != entry.model_id || f.layer_id != entry.layer_id)
        throw DataError(fmt::format("{}: holds {}/{}, manifest says {}/{}", entry.path.string(), f.model_id,
                                    f.layer_id, entry.model_id, entry.layer_id));
    return f;
}

}  // namespace mmenc
