#include "mmenc/synth.hpp"

#include <cmath>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "mmenc/error.hpp"
#include "mmenc/io.hpp"
#include "mmenc/response_io.hpp"
#include "mmenc/rng.hpp"

namespace mmenc {

std::string_view to_string(PlantedClass c)
{
    switch (c) {
    case PlantedClass::MultimodalLinear: return "multimodal-linear";
    case PlantedClass::MultimodalNonlinear: return "multimodal-nonlinear";
    case PlantedClass::UnimodalLanguage: return "unimodal-language";
    case PlantedClass::UnimodalVision: return "unimodal-vision";
    case PlantedClass::Noise: return "noise";
    }
    return "noise";
}

PlantedClass parse_planted_class(std::string_view s)
{
    for (std::size_t i = 0; i < kPlantedClassCount; ++i)
        if (to_string(static_cast<PlantedClass>(i)) == s) return static_cast<PlantedClass>(i);
    throw DataError(fmt::format("unknown planted class '{}'", s));
}

void SynthConfig::validate() const
{
    if (n_events < 50) throw ConfigError("synth_n_events must be at least 50");
    if (latent_dim == 0 || interaction_dim == 0 || fused_dim == 0) throw ConfigError("synthetic feature dimensions must be positive");
    if (!(noise_sigma >= 0.0) || !(layer_noise >= 0.0)) throw ConfigError("synthetic noise levels must be non-negative");
    window.validate();
}

namespace {

using Eigen::MatrixXd;

MatrixXd gaussian(const CounterRng& rng, std::uint64_t stream, Eigen::Index rows, Eigen::Index cols, double scale = 1.0)
{
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            m(i, j) = scale * rng.normal(stream, static_cast<std::uint64_t>(i * cols + j));
    return m;
}

std::uint64_t key(std::string_view name, std::uint64_t a = 0, std::uint64_t b = 0)
{
    return stream_key(stream_key(fnv1a64(name), a), b);
}

ModelLayers two_layers(std::string_view model, const MatrixXd& source, const CounterRng& rng, int alignment,
                       double layer_noise)
{
    ModelLayers ml{std::string(model), {}};
    MatrixXd shallow = source + gaussian(rng, key(model, 0x4c41594552ull, static_cast<std::uint64_t>(alignment)),
                                         source.rows(), source.cols(), layer_noise);
    ml.layers.push_back({std::string(model), "layer0", std::move(shallow), false, 0});
    ml.layers.push_back({std::string(model), "layer1", source, false, 0});
    return ml;
}

PlantedClass class_of(std::size_t idx, const SynthConfig& c)
{
    std::size_t acc = 0;
    for (std::size_t k = 0; k < kPlantedClassCount; ++k) {
        acc += c.electrodes_per_class[k];
        if (idx < acc) return static_cast<PlantedClass>(k);
    }
    return PlantedClass::Noise;
}

}  // namespace

SynthDataset generate(const SynthConfig& config)
{
    config.validate();
    const CounterRng rng(config.seed);
    const auto n = static_cast<Eigen::Index>(config.n_events);
    const auto d = static_cast<Eigen::Index>(config.latent_dim);
    const auto q = static_cast<Eigen::Index>(config.interaction_dim);
    const auto f = static_cast<Eigen::Index>(config.fused_dim);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

    // Model-level maps are shared by both alignments.
    const MatrixXd a_map = gaussian(rng, key("interaction-L"), d, q, inv_sqrt_d);
    const MatrixXd b_map = gaussian(rng, key("interaction-V"), d, q, inv_sqrt_d);
    const MatrixXd a_fuse = gaussian(rng, key("fuse-L"), d, f, inv_sqrt_d);
    const MatrixXd b_fuse = gaussian(rng, key("fuse-V"), d, f, inv_sqrt_d);

    SynthDataset out;
    out.specs = {{std::string(synth_models::kLanguage), ModalityClass::UnimodalLanguage, true},
                 {std::string(synth_models::kVision), ModalityClass::UnimodalVision, true},
                 {std::string(synth_models::kMultimodal), ModalityClass::MultimodalArchitectural, true},
                 {std::string(synth_models::kConcat), ModalityClass::LinearIntegration, true},
                 {std::string(synth_models::kFused), ModalityClass::LinearIntegration, true}};

    std::size_t n_el = 0;
    for (auto c : config.electrodes_per_class) n_el += c;
    const auto& labels = default_dkt_labels();
    for (std::size_t e = 0; e < n_el; ++e) {
        const auto planted = class_of(e, config);
        out.electrodes.push_back({static_cast<std::int64_t>(e + 1), static_cast<std::int64_t>(1 + e % 4),
                                  labels[(e * 7) % labels.size()], std::nullopt});
        SynthTruth t{static_cast<std::int64_t>(e + 1), planted, {}, {}};
        switch (planted) {
        case PlantedClass::MultimodalLinear: t.source = synth_models::kConcat; break;
        case PlantedClass::MultimodalNonlinear: t.source = synth_models::kMultimodal; break;
        case PlantedClass::UnimodalLanguage: t.source = synth_models::kLanguage; break;
        case PlantedClass::UnimodalVision: t.source = synth_models::kVision; break;
        case PlantedClass::Noise: break;
        }
        out.truth.push_back(std::move(t));
    }

    const auto centers = bin_centers_ms(config.window);
    const std::size_t n_bins = centers.size();
    std::vector<double> gain(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) gain[b] = 0.15 + 0.85 * std::exp(-0.5 * std::pow(centers[b] / 150.0, 2));

    for (int a = 0; a < 2; ++a) {
        auto& al = out.alignments[a];
        al.alignment = a == 0 ? Alignment::LanguageAligned : Alignment::VisionAligned;
        const auto ua = static_cast<std::uint64_t>(a);
        const double gap_lo = a == 0 ? 300.0 : 1000.0, gap_span = a == 0 ? 400.0 : 2000.0;
        double onset = 2500.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            al.events.push_back({i, onset, fmt::format("w{}", i), fmt::format("frame_{:06d}.png", i), al.alignment});
            onset += gap_lo + gap_span * rng.uniform(key("onset-gap", ua), static_cast<std::uint64_t>(i));
        }

        const MatrixXd lat_l = gaussian(rng, key("latent-L", ua), n, d);
        const MatrixXd lat_v = gaussian(rng, key("latent-V", ua), n, d);
        const MatrixXd inter = (lat_l * a_map).cwiseProduct(lat_v * b_map);
        MatrixXd concat(n, 2 * d);
        concat << lat_l, lat_v;
        const MatrixXd fused = lat_l * a_fuse + lat_v * b_fuse;

        const std::map<std::string, const MatrixXd*, std::less<>> sources{
            {std::string(synth_models::kLanguage), &lat_l},   {std::string(synth_models::kVision), &lat_v},
            {std::string(synth_models::kMultimodal), &inter}, {std::string(synth_models::kConcat), &concat},
            {std::string(synth_models::kFused), &fused}};
        for (const auto& spec : out.specs)
            al.models.push_back(two_layers(spec.model_id, *sources.at(spec.model_id), rng, a, config.layer_noise));

        auto& resp = al.responses;
        resp.electrodes = out.electrodes;
        resp.n_events = config.n_events;
        resp.n_bins = n_bins;
        resp.bin_centers_ms = centers;
        resp.values.assign(n_el * config.n_events * n_bins, 0.0);
        for (std::size_t e = 0; e < n_el; ++e) {
            auto& truth = out.truth[e];
            Eigen::VectorXd signal = Eigen::VectorXd::Zero(n);
            if (!truth.source.empty()) {
                const auto& src = *sources.at(truth.source);
                const Eigen::VectorXd w = gaussian(rng, key("weights", ua, e), src.cols(), 1);
                truth.weights[a].assign(w.data(), w.data() + w.size());
                signal = src * w;
                signal.array() -= signal.mean();
                const double sd = std::sqrt(signal.squaredNorm() / static_cast<double>(n));
                if (sd > 0.0) signal /= sd;
            }
            const auto noise_stream = key("response-noise", ua, e);
            for (std::size_t ev = 0; ev < config.n_events; ++ev)
                for (std::size_t b = 0; b < n_bins; ++b)
                    resp.at(e, ev, b) = gain[b] * signal(static_cast<Eigen::Index>(ev)) +
                                        config.noise_sigma * rng.normal(noise_stream, ev * n_bins + b);
        }
    }
    return out;
}

SynthPaths write_synth(const std::filesystem::path& dir, const SynthDataset& data, std::uint64_t config_hash)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    SynthPaths paths;
    paths.electrodes = dir / "electrodes.csv";
    paths.truth = dir / "ground_truth.csv";
    write_electrodes_csv(paths.electrodes, data.electrodes);
    write_truth_csv(paths.truth, data.truth);
    for (int a = 0; a < 2; ++a) {
        const auto& al = data.alignments[a];
        const auto name = std::string(to_string(al.alignment));
        const auto feat_dir = dir / "features" / name;
        fs::create_directories(feat_dir);
        paths.events[a] = dir / (name + "_events.csv");
        paths.responses[a] = dir / (name + "_responses.nrsp");
        paths.manifests[a] = feat_dir / "manifest.json";
        write_events_csv(paths.events[a], al.events);
        write_responses(paths.responses[a], al.responses, config_hash);
        FeatureManifest manifest;
        for (std::size_t m = 0; m < al.models.size(); ++m)
            for (const auto& layer : al.models[m].layers) {
                const auto file = fmt::format("{}_{}.nfea", layer.model_id, layer.layer_id);
                write_features(feat_dir / file, layer, config_hash);
                manifest.entries.push_back({layer.model_id, layer.layer_id, feat_dir / file, data.specs[m].modality,
                                            data.specs[m].trained});
            }
        write_manifest(paths.manifests[a], manifest);
    }
    return paths;
}

void write_truth_csv(const std::filesystem::path& path, std::span<const SynthTruth> truth)
{
    CsvWriter w(path, {"electrode_id", "planted_class", "source", "alignment", "weights"});
    for (const auto& t : truth)
        for (int a = 0; a < 2; ++a) {
            std::string weights;
            for (std::size_t i = 0; i < t.weights[a].size(); ++i)
                weights += (i ? " " : "") + format_double(t.weights[a][i]);
            w.cell(t.electrode_id).cell(to_string(t.planted)).cell(t.source);
            w.cell(to_string(a == 0 ? Alignment::LanguageAligned : Alignment::VisionAligned)).cell(weights);
            w.end_row();
        }
    w.finish();
}

std::vector<SynthTruth> read_truth_csv(const std::filesystem::path& path)
{
    const auto t = read_csv(path);
    const auto src = path.string();
    const auto c_e = t.column("electrode_id", src), c_c = t.column("planted_class", src),
               c_s = t.column("source", src), c_a = t.column("alignment", src), c_w = t.column("weights", src);
    std::vector<SynthTruth> out;
    std::map<std::int64_t, std::size_t> pos;
    for (const auto& r : t.rows) {
        const auto id = parse_int(r[c_e], src);
        if (!pos.contains(id)) {
            pos[id] = out.size();
            out.push_back({id, parse_planted_class(r[c_c]), r[c_s], {}});
        }
        auto& truth = out[pos[id]];
        const int a = parse_alignment(r[c_a]) == Alignment::LanguageAligned ? 0 : 1;
        std::string_view rest = r[c_w];
        while (!rest.empty()) {
            const auto sp = rest.find(' ');
            truth.weights[a].push_back(parse_double(rest.substr(0, sp), src));
            rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
        }
    }
    return out;
}

RecoveryReport oracle_recovery_report(const TestSuite& suite, std::span<const SynthTruth> truth)
{
    std::map<std::int64_t, PlantedClass> planted;
    for (const auto& t : truth) planted[t.electrode_id] = t.planted;
    RecoveryReport rep;
    const std::size_t n_el = suite.outcomes.size() / kTestCount;
    for (std::size_t e = 0; e < n_el; ++e) {
        const auto id = suite.at(e, TestId::Weak).electrode_id;
        const auto it = planted.find(id);
        if (it == planted.end()) throw DataError(fmt::format("electrode {} has no ground truth", id));
        const auto c = static_cast<std::size_t>(it->second);
        ++rep.totals[c];
        for (const auto t : kAllTests) rep.passes[c][static_cast<std::size_t>(t)] += suite.at(e, t).pass ? 1 : 0;
    }
    const auto frac = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
    const auto cls = [](PlantedClass c) { return static_cast<std::size_t>(c); };
    const auto test = [](TestId t) { return static_cast<std::size_t>(t); };
    const auto nl = cls(PlantedClass::MultimodalNonlinear), lin = cls(PlantedClass::MultimodalLinear);
    rep.strict_sensitivity = frac(rep.passes[nl][test(TestId::Strict)], rep.totals[nl]);
    rep.nonlinear_sensitivity = frac(rep.passes[nl][test(TestId::NonlinearIntegration)], rep.totals[nl]);
    std::size_t others = 0, other_ni = 0, null_total = 0, null_weak = 0;
    for (std::size_t c = 0; c < kPlantedClassCount; ++c) {
        if (c == nl) continue;
        others += rep.totals[c];
        other_ni += rep.passes[c][test(TestId::NonlinearIntegration)];
        if (c != lin) {
            null_total += rep.totals[c];
            null_weak += rep.passes[c][test(TestId::Weak)];
        }
    }
    rep.nonlinear_false_positive = frac(other_ni, others);
    rep.weak_false_positive = frac(null_weak, null_total);

    std::size_t lin_ok = 0;
    for (std::size_t e = 0; e < n_el; ++e) {
        const auto id = suite.at(e, TestId::Weak).electrode_id;
        if (planted.at(id) == PlantedClass::MultimodalLinear && suite.at(e, TestId::Strict).pass &&
            !suite.at(e, TestId::NonlinearIntegration).pass)
            ++lin_ok;
    }
    rep.linear_strict_not_nonlinear = frac(lin_ok, rep.totals[lin]);
    return rep;
}

std::string RecoveryReport::to_json() const
{
    nlohmann::ordered_json j;
    j["strict_sensitivity"] = strict_sensitivity;
    j["nonlinear_sensitivity"] = nonlinear_sensitivity;
    j["nonlinear_false_positive_rate"] = nonlinear_false_positive;
    j["linear_strict_not_nonlinear"] = linear_strict_not_nonlinear;
    j["weak_false_positive_rate"] = weak_false_positive;
    auto& confusion = j["confusion"];
    for (std::size_t c = 0; c < kPlantedClassCount; ++c) {
        nlohmann::ordered_json row;
        row["electrodes"] = totals[c];
        for (const auto t : kAllTests) row[std::string(to_string(t))] = passes[c][static_cast<std::size_t>(t)];
        confusion[std::string(to_string(static_cast<PlantedClass>(c)))] = row;
    }
    return j.dump(2);
}

}  // namespace mmenc
