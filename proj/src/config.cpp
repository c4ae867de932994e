#include "mmenc/config.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "mmenc/error.hpp"
#include "mmenc/io.hpp"
#include "mmenc/rng.hpp"

namespace mmenc {

using nlohmann::json;

const std::vector<ConfigKey>& config_keys()
{
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k{
            {"seed", "uint", "master seed (required)"},
            {"threads", "uint", "worker threads; results do not depend on it"},
            {"out_dir", "path", "stage output directory"},
            {"window_ms", "float", "peri-event window length"},
            {"sub_window_ms", "float", "averaging sub-window length"},
            {"stride_ms", "float", "sub-window stride"},
            {"lambda_min", "float", "smallest ridge penalty"},
            {"lambda_max", "float", "largest ridge penalty"},
            {"lambda_count", "int", "log-spaced penalties in the grid"},
            {"k_folds", "int", "cross-validation folds"},
            {"epsilon", "float", "JL distortion for feature projection"},
            {"B", "uint", "event-structure bootstrap resamples"},
            {"B2", "uint", "time-bin bootstrap resamples"},
            {"sort_by_onset", "bool", "sort resampled events by onset"},
            {"max_failure_fraction", "float", "tolerated share of failed resamples"},
            {"alpha", "float", "FDR level"},
            {"min_bins", "uint", "surviving bins needed for a comparison"},
            {"slip_multimodal", "string", "multimodal member of the architecture-controlled pair"},
            {"slip_unimodal", "string", "unimodal member of the architecture-controlled pair"},
            {"contrasts", "contrasts", "extra pairwise comparisons, name=first:second,..."},
            {"electrodes", "path", "electrode metadata CSV"},
            {"dkt_labels", "path", "region label list (built-in DKT list when empty)"},
            {"ground_truth", "path", "synthetic ground truth CSV for the recovery report"},
        };
        for (const auto* a : {"language", "vision"})
            for (const auto* f : {"events", "responses", "signals", "features"})
                k.push_back({fmt::format("{}_{}", a, f), "path", fmt::format("{}-aligned {}", a, f)});
        k.insert(k.end(), {
                              {"synth_n_events", "uint", "synthetic events per alignment"},
                              {"synth_per_class", "uint", "synthetic electrodes per planted class"},
                              {"synth_latent_dim", "uint", "dimension of the language and vision sources"},
                              {"synth_interaction_dim", "uint", "dimension of the multiplicative source"},
                              {"synth_fused_dim", "uint", "dimension of the linear fusion source"},
                              {"synth_noise_sigma", "float", "response noise standard deviation"},
                              {"synth_layer_noise", "float", "noise added to every shallow synthetic layer"},
                          });
        return k;
    }();
    return keys;
}

namespace {

const ConfigKey& key_info(const std::string& name)
{
    for (const auto& k : config_keys())
        if (k.name == name) return k;
    throw ConfigError(fmt::format("unknown configuration key '{}'", name));
}

bool is_path_key(const std::string& type) { return type == "path"; }

json contrasts_json(const std::vector<Contrast>& cs)
{
    json arr = json::array();
    for (const auto& c : cs) arr.push_back({{"name", c.name}, {"first", c.first}, {"second", c.second}});
    return arr;
}

std::vector<Contrast> parse_contrasts_text(std::string_view text)
{
    std::vector<Contrast> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        auto item = text.substr(0, comma);
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        if (item.empty()) continue;
        std::string name;
        if (const auto eq = item.find('='); eq != std::string_view::npos) {
            name = item.substr(0, eq);
            item = item.substr(eq + 1);
        }
        const auto colon = item.find(':');
        if (colon == std::string_view::npos || colon == 0 || colon + 1 == item.size())
            throw ConfigError(fmt::format("contrast '{}' must look like first:second", item));
        Contrast c{name, std::string(item.substr(0, colon)), std::string(item.substr(colon + 1))};
        if (c.name.empty()) c.name = c.first + "_vs_" + c.second;
        out.push_back(std::move(c));
    }
    return out;
}

/// Empty string when `v` fits the key type, else a description of the problem.
std::string type_problem(const json& v, const std::string& type)
{
    if (type == "uint") return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0) ? "" : "a non-negative integer";
    if (type == "int") return v.is_number_integer() ? "" : "an integer";
    if (type == "float") return v.is_number() ? "" : "a number";
    if (type == "bool") return v.is_boolean() ? "" : "true or false";
    if (type == "string" || type == "path") return v.is_string() ? "" : "a string";
    if (type == "contrasts") {
        if (!v.is_array()) return "an array of {name, first, second} objects";
        for (const auto& c : v)
            if (!c.is_object() || !c.contains("first") || !c.contains("second") || !c["first"].is_string() ||
                !c["second"].is_string())
                return "an array of {name, first, second} objects";
        return "";
    }
    return "a known type";
}

json parse_flag(const std::string& text, const std::string& type)
{
    if (type == "uint" || type == "int") {
        const auto v = parse_int(text, "flag");
        if (type == "uint" && v < 0) throw ConfigError("negative value");
        return type == "uint" ? json(static_cast<std::uint64_t>(v)) : json(v);
    }
    if (type == "float") return parse_double(text, "flag");
    if (type == "bool") {
        if (text == "true" || text == "1" || text == "yes") return true;
        if (text == "false" || text == "0" || text == "no") return false;
        throw ConfigError("not a boolean");
    }
    if (type == "contrasts") return contrasts_json(parse_contrasts_text(text));
    return text;
}

std::string path_text(const std::filesystem::path& p) { return p.empty() ? std::string() : p.string(); }

json to_json_object(const RunConfig& c, bool include_paths)
{
    json j;
    j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
    j["window_ms"] = c.window.window_ms;
    j["sub_window_ms"] = c.window.sub_window_ms;
    j["stride_ms"] = c.window.stride_ms;
    j["lambda_min"] = c.lambda_min;
    j["lambda_max"] = c.lambda_max;
    j["lambda_count"] = c.lambda_count;
    j["k_folds"] = c.k_folds;
    j["epsilon"] = c.epsilon;
    j["B"] = c.b;
    j["B2"] = c.b2;
    j["sort_by_onset"] = c.sort_by_onset;
    j["max_failure_fraction"] = c.max_failure_fraction;
    j["alpha"] = c.alpha;
    j["min_bins"] = c.min_bins;
    j["slip_multimodal"] = c.slip_multimodal;
    j["slip_unimodal"] = c.slip_unimodal;
    j["contrasts"] = contrasts_json(c.contrasts);
    j["synth_n_events"] = c.synth.n_events;
    j["synth_per_class"] = c.synth.electrodes_per_class[0];
    j["synth_latent_dim"] = c.synth.latent_dim;
    j["synth_interaction_dim"] = c.synth.interaction_dim;
    j["synth_fused_dim"] = c.synth.fused_dim;
    j["synth_noise_sigma"] = c.synth.noise_sigma;
    j["synth_layer_noise"] = c.synth.layer_noise;
    if (include_paths) {
        j["threads"] = c.threads;
        j["out_dir"] = path_text(c.out_dir);
        j["electrodes"] = path_text(c.electrodes);
        j["dkt_labels"] = path_text(c.dkt_labels);
        j["ground_truth"] = path_text(c.ground_truth);
        for (int a = 0; a < 2; ++a) {
            const std::string p = a == 0 ? "language_" : "vision_";
            j[p + "events"] = path_text(c.alignments[a].events);
            j[p + "responses"] = path_text(c.alignments[a].responses);
            j[p + "signals"] = path_text(c.alignments[a].signals);
            j[p + "features"] = path_text(c.alignments[a].features);
        }
    }
    return j;
}

RunConfig from_json_object(const json& j)
{
    RunConfig c;
    if (!j.at("seed").is_null()) c.seed = j.at("seed").get<std::uint64_t>();
    c.threads = j.at("threads").get<unsigned>();
    c.out_dir = j.at("out_dir").get<std::string>();
    c.window = {j.at("window_ms").get<double>(), j.at("sub_window_ms").get<double>(), j.at("stride_ms").get<double>()};
    c.lambda_min = j.at("lambda_min").get<double>();
    c.lambda_max = j.at("lambda_max").get<double>();
    c.lambda_count = j.at("lambda_count").get<int>();
    c.k_folds = j.at("k_folds").get<int>();
    c.epsilon = j.at("epsilon").get<double>();
    c.b = j.at("B").get<std::size_t>();
    c.b2 = j.at("B2").get<std::size_t>();
    c.sort_by_onset = j.at("sort_by_onset").get<bool>();
    c.max_failure_fraction = j.at("max_failure_fraction").get<double>();
    c.alpha = j.at("alpha").get<double>();
    c.min_bins = j.at("min_bins").get<std::size_t>();
    c.slip_multimodal = j.at("slip_multimodal").get<std::string>();
    c.slip_unimodal = j.at("slip_unimodal").get<std::string>();
    for (const auto& item : j.at("contrasts")) {
        Contrast ct{item.value("name", std::string()), item.at("first").get<std::string>(),
                    item.at("second").get<std::string>()};
        if (ct.name.empty()) ct.name = ct.first + "_vs_" + ct.second;
        c.contrasts.push_back(std::move(ct));
    }
    c.electrodes = j.at("electrodes").get<std::string>();
    c.dkt_labels = j.at("dkt_labels").get<std::string>();
    c.ground_truth = j.at("ground_truth").get<std::string>();
    for (int a = 0; a < 2; ++a) {
        const std::string p = a == 0 ? "language_" : "vision_";
        c.alignments[a] = {j.at(p + "events").get<std::string>(), j.at(p + "responses").get<std::string>(),
                           j.at(p + "signals").get<std::string>(), j.at(p + "features").get<std::string>()};
    }
    c.synth.n_events = j.at("synth_n_events").get<std::size_t>();
    c.synth.electrodes_per_class.fill(j.at("synth_per_class").get<std::size_t>());
    c.synth.latent_dim = j.at("synth_latent_dim").get<std::size_t>();
    c.synth.interaction_dim = j.at("synth_interaction_dim").get<std::size_t>();
    c.synth.fused_dim = j.at("synth_fused_dim").get<std::size_t>();
    c.synth.noise_sigma = j.at("synth_noise_sigma").get<double>();
    c.synth.layer_noise = j.at("synth_layer_noise").get<double>();
    c.synth.window = c.window;
    c.synth.seed = c.seed.value_or(0);
    return c;
}

void validate(const RunConfig& c)
{
    c.window.validate();
    if (!(c.lambda_min > 0.0) || !(c.lambda_max >= c.lambda_min) || c.lambda_count < 1)
        throw ConfigError("lambda grid needs 0 < lambda_min <= lambda_max and lambda_count >= 1");
    if (c.k_folds < 2) throw ConfigError("k_folds must be at least 2");
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
    if (c.b == 0 || c.b2 == 0) throw ConfigError("B and B2 must be positive");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(c.max_failure_fraction >= 0.0 && c.max_failure_fraction < 1.0))
        throw ConfigError("max_failure_fraction must lie in [0, 1)");
    if (c.min_bins == 0) throw ConfigError("min_bins must be positive");
}

}  // namespace

std::uint64_t RunConfig::require_seed() const
{
    if (!seed) throw ConfigError("no seed given; set \"seed\" in the config file or pass --seed");
    return *seed;
}

std::string RunConfig::to_json(bool include_paths) const { return to_json_object(*this, include_paths).dump(2); }

std::uint64_t RunConfig::hash() const { return fnv1a64(to_json_object(*this, false).dump()); }

RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::map<std::string, std::string>& overrides)
{
    json j = to_json_object(RunConfig{}, true);
    std::map<std::string, std::string> file_text;
    if (file) {
        std::ifstream in(*file);
        if (!in) throw ConfigError(fmt::format("cannot open config file {}", file->string()));
        json f;
        try {
            f = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError(fmt::format("{}: {}", file->string(), e.what()));
        }
        if (!f.is_object()) throw ConfigError(file->string() + ": top level must be an object");
        const auto base = std::filesystem::absolute(*file).parent_path();
        for (auto& [name, value] : f.items()) {
            const auto& info = key_info(name);
            if (info.name == "seed" && value.is_null()) continue;
            if (const auto p = type_problem(value, info.type); !p.empty())
                throw ConfigError(fmt::format("{}: key '{}' must be {}, got {}", file->string(), name, p, value.dump()));
            file_text[name] = value.dump();
            if (is_path_key(info.type) && !value.get<std::string>().empty()) {
                const std::filesystem::path path = value.get<std::string>();
                j[name] = (path.is_absolute() ? path : base / path).lexically_normal().string();
            } else {
                j[name] = value;
            }
        }
    }
    for (const auto& [name, text] : overrides) {
        const auto& info = key_info(name);
        try {
            j[name] = parse_flag(text, info.type);
        } catch (const Error& e) {
            const auto in_file = file_text.find(name);
            if (in_file != file_text.end())
                throw ConfigError(fmt::format("flag --{}={} conflicts with {} ({} = {}): expected {}", name, text,
                                              file->string(), name, in_file->second, info.type));
            throw ConfigError(fmt::format("flag --{}={}: expected {} ({})", name, text, info.type, e.what()));
        }
        if (is_path_key(info.type) && !text.empty())
            j[name] = std::filesystem::absolute(text).lexically_normal().string();
    }
    RunConfig c;
    try {
        c = from_json_object(j);
    } catch (const json::exception& e) {
        throw ConfigError(e.what());
    }
    validate(c);
    return c;
}

void write_config(const std::filesystem::path& path, const RunConfig& config)
{
    std::ofstream out(path);
    out << config.to_json(true) << '\n';
    if (!out) throw DataError("cannot write " + path.string());
}

}  // namespace mmenc
