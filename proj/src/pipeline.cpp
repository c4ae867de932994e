#include "mmenc/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>

#include <Eigen/Core>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "mmenc/error.hpp"
#include "mmenc/io.hpp"
#include "mmenc/response_io.hpp"
#include "mmenc/score_io.hpp"

namespace mmenc {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

AnalysisParams AnalysisParams::from(const RunConfig& c)
{
    AnalysisParams p;
    p.k_folds = c.k_folds;
    p.ridge = RidgeConfig::log_grid(c.lambda_min, c.lambda_max, c.lambda_count);
    p.b = c.b;
    p.sort_by_onset = c.sort_by_onset;
    p.bootstrap.max_failure_fraction = c.max_failure_fraction;
    p.compare = {c.alpha, c.min_bins, c.b2, c.require_seed()};
    p.threads = c.threads;
    return p;
}

ScoreTensor regress_alignment(const std::vector<ModelLayers>& models, const ResponseTensor& responses,
                              const AnalysisParams& params)
{
    std::vector<std::int64_t> ids;
    for (const auto& e : responses.electrodes) ids.push_back(e.electrode_id);
    const auto plan = make_folds(static_cast<Eigen::Index>(responses.n_events), params.k_folds);
    auto scores = run_regression(models, responses.target_matrix(), ids, responses.n_bins, plan, params.ridge,
                                 params.threads);
    scores.bin_centers_ms = responses.bin_centers_ms;
    return scores;
}

BootstrapCI bootstrap_alignment(const std::vector<ModelLayers>& models, const ResponseTensor& responses,
                                const std::vector<EventStructure>& events, const ScoreTensor& scores,
                                const AnalysisParams& params, std::uint64_t seed)
{
    std::vector<double> onsets;
    for (const auto& e : events) onsets.push_back(e.onset_ms);
    const auto resamples = make_resamples(responses.n_events, params.b, seed, onsets, params.sort_by_onset);
    const auto plan = make_folds(static_cast<Eigen::Index>(responses.n_events), params.k_folds);
    auto bootstrap = params.bootstrap;
    bootstrap.rcond_tolerance = params.ridge.rcond_tolerance;
    return bootstrap_scores(models, responses.target_matrix(), plan, scores, resamples, bootstrap, params.threads);
}

std::vector<std::size_t> pair_subset(const BootstrapCI& ci, const std::string& first, const std::string& second)
{
    const auto find = [&](const std::string& id) {
        for (std::size_t m = 0; m < ci.models.size(); ++m)
            if (ci.models[m].model_id == id) return m;
        throw ConfigError(fmt::format("model '{}' named in a pairwise comparison is not in the battery", id));
    };
    if (first == second) throw ConfigError(fmt::format("pairwise comparison of '{}' with itself", first));
    return {find(first), find(second)};
}

void compare_alignment(AlignmentAnalysis& a, const SlipPair& slip, const std::vector<Contrast>& contrasts,
                       const ComparisonConfig& config)
{
    a.mask = survivor_mask(a.ci);
    a.battery = compare_battery(a.ci, a.mask, a.scores, {}, "battery", config);
    if (!slip.multimodal.empty() || !slip.unimodal.empty()) {
        const auto pair = pair_subset(a.ci, slip.multimodal, slip.unimodal);
        a.slip = compare_battery(a.ci, a.mask, a.scores, pair, "slip", config);
    }
    for (const auto& c : contrasts) {
        const auto pair = pair_subset(a.ci, c.first, c.second);
        a.contrasts[c.name] = compare_battery(a.ci, a.mask, a.scores, pair, "contrast:" + c.name, config);
    }
}

AlignmentAnalysis analyze_alignment(const std::vector<ModelLayers>& models, const ResponseTensor& responses,
                                    const std::vector<EventStructure>& events, const AnalysisParams& params,
                                    std::uint64_t seed, const SlipPair& slip, const std::vector<Contrast>& contrasts)
{
    AlignmentAnalysis a;
    a.scores = regress_alignment(models, responses, params);
    a.ci = bootstrap_alignment(models, responses, events, a.scores, params, seed);
    auto compare = params.compare;
    compare.seed = seed;
    compare_alignment(a, slip, contrasts, compare);
    return a;
}

SynthRun analyze_synth(const SynthDataset& data, const AnalysisParams& params, std::uint64_t seed,
                       const SlipPair& slip)
{
    SynthRun run;
    for (int a = 0; a < 2; ++a) {
        const auto& al = data.alignments[a];
        run.alignments[a] = analyze_alignment(al.models, al.responses, al.events, params, seed, slip);
    }
    auto compare = params.compare;
    compare.seed = seed;
    run.suite = run_tests(run.alignments[0].evidence(), run.alignments[1].evidence(), ModelClasses(data.specs), slip,
                          compare);
    run.recovery = oracle_recovery_report(run.suite, data.truth);
    return run;
}

// ---------------------------------------------------------------------------
// File-based stages

namespace {

constexpr std::array<Alignment, 2> kAlignments{Alignment::LanguageAligned, Alignment::VisionAligned};

std::string align_name(int a) { return std::string(to_string(kAlignments[a])); }

const fs::path& require(const fs::path& p, std::string_view producer)
{
    if (!fs::exists(p))
        throw StageOrderError(fmt::format("{} is missing; run `mmenc {}` first", p.string(), producer));
    return p;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path);
    out << text;
    if (!out) throw DataError("cannot write " + path.string());
}

fs::path ingest_dir(const RunConfig& c, int a) { return c.out_dir / "ingest" / align_name(a); }

struct Ingested
{
    std::vector<EventStructure> events;
    ResponseTensor responses;
    FeatureManifest manifest;
    std::vector<ModelSpec> specs;
    std::vector<ModelLayers> models;
};

Ingested load_ingested(const RunConfig& c, int a, bool with_features)
{
    const auto dir = ingest_dir(c, a);
    Ingested in;
    in.events = read_events_csv(require(dir / "events.csv", "ingest"));
    in.responses = read_responses(require(dir / "responses.nrsp", "ingest"));
    in.manifest = read_manifest(require(dir / "manifest.json", "ingest"));
    in.specs = in.manifest.models();
    if (with_features)
        for (const auto& spec : in.specs) {
            ModelLayers ml{spec.model_id, {}};
            for (const auto* entry : in.manifest.layers_of(spec.model_id)) ml.layers.push_back(load_feature_entry(*entry));
            in.models.push_back(std::move(ml));
        }
    return in;
}

void warn_if_stale(std::uint64_t stored, std::uint64_t current, const fs::path& path)
{
    if (stored != current)
        std::cerr << fmt::format("warning: {} was written under config {} (current {})\n", path.string(),
                                 hex64(stored), hex64(current));
}

/// Events, responses and electrode metadata of one alignment from the raw inputs.
struct RawAlignment
{
    std::vector<EventStructure> events;
    std::vector<std::size_t> kept;  // rows of the input event list that survived windowing
    ResponseTensor responses;
};

RawAlignment read_raw_alignment(const RunConfig& c, int a, const std::vector<ElectrodeMeta>& electrodes)
{
    const auto& paths = c.alignments[a];
    const auto name = align_name(a);
    if (paths.events.empty()) throw ConfigError(fmt::format("{}_events is not set", name));
    if (paths.features.empty()) throw ConfigError(fmt::format("{}_features is not set", name));
    RawAlignment raw;
    const auto events = read_events_csv(paths.events);
    for (const auto& ev : events)
        if (ev.alignment != kAlignments[a])
            throw DataError(fmt::format("{}: event {} is {}-aligned", paths.events.string(), ev.event_id,
                                        to_string(ev.alignment)));
    if (!paths.responses.empty()) {
        raw.responses = load_responses(paths.responses);
        if (raw.responses.n_bins != bin_count(c.window))
            throw DataError(fmt::format("{} has {} bins but the configured window gives {}", paths.responses.string(),
                                        raw.responses.n_bins, bin_count(c.window)));
        raw.events = events;
        raw.kept.resize(events.size());
        for (std::size_t i = 0; i < events.size(); ++i) raw.kept[i] = i;
        if (!electrodes.empty()) {
            for (auto& meta : raw.responses.electrodes) {
                const auto it = std::find_if(electrodes.begin(), electrodes.end(), [&](const ElectrodeMeta& m) {
                    return m.electrode_id == meta.electrode_id;
                });
                if (it == electrodes.end())
                    throw DataError(fmt::format("electrode {} has no row in {}", meta.electrode_id, c.electrodes.string()));
                meta = *it;
            }
        }
    } else if (!paths.signals.empty()) {
        if (electrodes.empty()) throw ConfigError("raw signals need the electrodes metadata file");
        const auto signals = read_signals(paths.signals);
        auto extracted = extract_dataset(signals, electrodes, events, c.window, c.threads);
        for (const auto& r : extracted.rejected)
            std::cerr << fmt::format("{}: dropped event {}: {}\n", name, r.event_id, r.reason);
        for (const auto& kept : extracted.events) {
            const auto it = std::find_if(events.begin(), events.end(),
                                         [&](const EventStructure& e) { return e.event_id == kept.event_id; });
            raw.kept.push_back(static_cast<std::size_t>(it - events.begin()));
        }
        raw.events = std::move(extracted.events);
        raw.responses = std::move(extracted.responses);
    } else {
        throw ConfigError(fmt::format("set {0}_responses or {0}_signals", name));
    }
    const auto report = validate_dataset(raw.events, raw.responses);
    if (!report.ok())
        throw DataError(fmt::format("{}-aligned dataset is invalid: {}", name, fmt::join(report.violations, "; ")));
    return raw;
}

std::string safe_name(std::string s)
{
    for (auto& ch : s)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.')) ch = '_';
    return s;
}

}  // namespace

void stage_ingest(const RunConfig& c)
{
    const auto seed = c.require_seed();
    const auto hash = c.hash();
    std::vector<ElectrodeMeta> electrodes;
    if (!c.electrodes.empty()) electrodes = read_electrodes_csv(c.electrodes);

    std::vector<ElectrodeMeta> first_electrodes;
    for (int a = 0; a < 2; ++a) {
        const auto raw = read_raw_alignment(c, a, electrodes);
        const auto dir = ingest_dir(c, a);
        fs::create_directories(dir / "features");

        const auto source = read_manifest(c.alignments[a].features);
        FeatureManifest out_manifest;
        for (const auto& entry : source.entries) {
            auto f = load_feature_entry(entry);
            if (static_cast<std::size_t>(f.n_events()) <
                (raw.kept.empty() ? 0 : *std::max_element(raw.kept.begin(), raw.kept.end()) + 1))
                throw DataError(fmt::format("{}/{} has {} rows but the event list needs more", entry.model_id,
                                            entry.layer_id, f.n_events()));
            if (!c.alignments[a].responses.empty() && static_cast<std::size_t>(f.n_events()) != raw.events.size())
                throw DataError(fmt::format("{}/{} has {} rows for {} events", entry.model_id, entry.layer_id,
                                            f.n_events(), raw.events.size()));
            Eigen::MatrixXd rows(static_cast<Eigen::Index>(raw.kept.size()), f.dim());
            for (std::size_t i = 0; i < raw.kept.size(); ++i)
                rows.row(static_cast<Eigen::Index>(i)) = f.values.row(static_cast<Eigen::Index>(raw.kept[i]));
            f.values = std::move(rows);
            const auto plan = plan_projection(raw.events.size(), static_cast<std::size_t>(f.dim()), c.epsilon, seed);
            const auto projected = sparse_projection(f, plan, c.threads);
            const auto file = dir / "features" / safe_name(fmt::format("{}__{}.nfea", entry.model_id, entry.layer_id));
            write_features(file, projected, hash);
            out_manifest.entries.push_back({entry.model_id, entry.layer_id, file, entry.modality, entry.trained});
        }
        write_manifest(dir / "manifest.json", out_manifest);
        write_events_csv(dir / "events.csv", raw.events);
        write_responses(dir / "responses.nrsp", raw.responses, hash);
        if (a == 0) first_electrodes = raw.responses.electrodes;
        std::cout << fmt::format("ingest {}: {} events, {} electrodes, {} bins, {} feature layers\n", align_name(a),
                                 raw.events.size(), raw.responses.n_electrodes(), raw.responses.n_bins,
                                 out_manifest.entries.size());
    }
    write_electrodes_csv(c.out_dir / "ingest" / "electrodes.csv", first_electrodes);
}

void stage_regress(const RunConfig& c)
{
    const auto params = AnalysisParams::from(c);
    const auto hash = c.hash();
    fs::create_directories(c.out_dir / "regress");
    for (int a = 0; a < 2; ++a) {
        const auto in = load_ingested(c, a, true);
        const auto scores = regress_alignment(in.models, in.responses, params);
        const auto base = c.out_dir / "regress" / align_name(a);
        write_scores(fs::path(base.string() + ".nscr"), scores, hash);
        write_scores_csv(fs::path(base.string() + "_scores.csv"), scores, hash);
        std::cout << fmt::format("regress {}: {} models, {} electrodes x {} bins\n", align_name(a),
                                 scores.models.size(), scores.n_electrodes(), scores.n_bins);
    }
}

namespace {

ScoreTensor load_scores(const RunConfig& c, int a)
{
    const auto path = c.out_dir / "regress" / (align_name(a) + ".nscr");
    std::uint64_t stored = 0;
    auto scores = read_scores(require(path, "regress"), &stored);
    warn_if_stale(stored, c.hash(), path);
    return scores;
}

fs::path bootstrap_file(const RunConfig& c, int a, std::string_view suffix)
{
    return c.out_dir / "bootstrap" / fmt::format("{}_{}", align_name(a), suffix);
}

fs::path compare_file(const RunConfig& c, int a, std::string_view suffix)
{
    return c.out_dir / "compare" / fmt::format("{}_{}", align_name(a), suffix);
}

}  // namespace

void stage_bootstrap(const RunConfig& c)
{
    const auto params = AnalysisParams::from(c);
    const auto seed = c.require_seed();
    const auto hash = c.hash();
    fs::create_directories(c.out_dir / "bootstrap");
    for (int a = 0; a < 2; ++a) {
        const auto in = load_ingested(c, a, true);
        const auto scores = load_scores(c, a);
        const auto ci = bootstrap_alignment(in.models, in.responses, in.events, scores, params, seed);
        const auto mask = survivor_mask(ci);
        write_ci_csv(bootstrap_file(c, a, "ci.csv"), ci, hash);
        write_survivors_csv(bootstrap_file(c, a, "survivors.csv"), mask, ci.electrode_ids, hash);
        ordered_json meta;
        meta["config_hash"] = hex64(hash);
        meta["B"] = ci.n_resamples;
        meta["seed"] = seed;
        meta["sort_by_onset"] = c.sort_by_onset;
        meta["resample_hash"] = hex64(ci.resample_hash);
        for (const auto& m : ci.models) meta["failed_resamples"][m.model_id] = m.failed_resamples;
        write_text(bootstrap_file(c, a, "bootstrap.json"), meta.dump(2) + "\n");
        std::cout << fmt::format("bootstrap {}: B = {}, resample hash {}\n", align_name(a), ci.n_resamples,
                                 hex64(ci.resample_hash));
    }
}

namespace {

AlignmentAnalysis load_bootstrapped(const RunConfig& c, int a)
{
    AlignmentAnalysis an;
    an.scores = load_scores(c, a);
    an.ci = read_ci_csv(require(bootstrap_file(c, a, "ci.csv"), "bootstrap"));
    for (std::size_t m = 0; m < an.ci.models.size(); ++m)
        if (m >= an.scores.models.size() || an.ci.models[m].model_id != an.scores.models[m].model_id)
            throw DataError("bootstrap intervals and regression scores list different models");
    an.mask = survivor_mask(an.ci);
    return an;
}

SlipPair slip_of(const RunConfig& c) { return {c.slip_multimodal, c.slip_unimodal}; }

}  // namespace

void stage_compare(const RunConfig& c)
{
    const auto params = AnalysisParams::from(c);
    const auto hash = c.hash();
    fs::create_directories(c.out_dir / "compare");
    for (int a = 0; a < 2; ++a) {
        const auto in = load_ingested(c, a, false);
        auto an = load_bootstrapped(c, a);
        compare_alignment(an, slip_of(c), c.contrasts, params.compare);
        write_verdicts_csv(compare_file(c, a, "battery.csv"), an.battery, in.responses.electrodes, hash);
        if (!an.slip.empty()) write_verdicts_csv(compare_file(c, a, "slip.csv"), an.slip, in.responses.electrodes, hash);
        for (const auto& [name, verdicts] : an.contrasts)
            write_verdicts_csv(compare_file(c, a, fmt::format("contrast_{}.csv", safe_name(name))), verdicts,
                               in.responses.electrodes, hash);
        std::size_t decided = 0;
        for (const auto& v : an.battery) decided += v.decided() ? 1 : 0;
        std::cout << fmt::format("compare {}: {} of {} electrodes decided\n", align_name(a), decided, an.battery.size());
    }
}

void stage_tests(const RunConfig& c)
{
    const auto params = AnalysisParams::from(c);
    const auto hash = c.hash();
    if (c.slip_multimodal.empty() || c.slip_unimodal.empty())
        throw ConfigError("slip_multimodal and slip_unimodal must name the architecture-controlled pair");
    std::array<AlignmentAnalysis, 2> an;
    std::vector<ModelSpec> specs;
    std::vector<ElectrodeMeta> electrodes;
    for (int a = 0; a < 2; ++a) {
        const auto in = load_ingested(c, a, false);
        if (a == 0) {
            specs = in.specs;
            electrodes = in.responses.electrodes;
        }
        an[a] = load_bootstrapped(c, a);
        an[a].battery = read_verdicts_csv(require(compare_file(c, a, "battery.csv"), "compare"));
        an[a].slip = read_verdicts_csv(require(compare_file(c, a, "slip.csv"), "compare"));
    }
    const auto suite = run_tests(an[0].evidence(), an[1].evidence(), ModelClasses(specs), slip_of(c), params.compare);
    fs::create_directories(c.out_dir / "tests");
    write_outcomes_csv(c.out_dir / "tests" / "outcomes.csv", suite, electrodes, hash);
    for (int a = 0; a < 2; ++a)
        write_verdicts_csv(c.out_dir / "tests" / (align_name(a) + "_nonlinear_pairs.csv"), suite.nonlinear.pairs[a],
                           electrodes, hash);
    std::size_t strict = 0;
    for (std::size_t e = 0; e < electrodes.size(); ++e) strict += suite.at(e, TestId::Strict).pass ? 1 : 0;
    std::cout << fmt::format("tests: {} of {} electrodes pass the strict test\n", strict, electrodes.size());
}

void stage_report(const RunConfig& c)
{
    const auto hash = c.hash();
    const auto suite = read_outcomes_csv(require(c.out_dir / "tests" / "outcomes.csv", "tests"));
    const auto electrodes = read_electrodes_csv(require(c.out_dir / "ingest" / "electrodes.csv", "ingest"));
    const auto labels = c.dkt_labels.empty() ? default_dkt_labels() : read_region_labels(c.dkt_labels);
    const auto regions = aggregate_regions(suite, electrodes, labels);

    const auto dir = c.out_dir / "report";
    fs::create_directories(dir);
    const auto table = format_test_table(suite, electrodes.size(), hash);
    write_text(dir / "test_table.txt", table);
    write_regions_csv(dir / "regions.csv", regions, hash);
    std::cout << table;

    if (!c.ground_truth.empty()) {
        const auto recovery = oracle_recovery_report(suite, read_truth_csv(c.ground_truth));
        write_text(dir / "recovery.json", recovery.to_json() + "\n");
        std::cout << "\nrecovery: " << recovery.to_json() << "\n";
    }

    ordered_json manifest;
    manifest["engine_version"] = kEngineVersion;
    manifest["config_hash"] = hex64(hash);
    manifest["seed"] = c.require_seed();
    manifest["eigen_version"] = fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
    manifest["fmt_version"] = FMT_VERSION;
    manifest["config"] = ordered_json::parse(c.to_json(true));
    std::vector<fs::path> files;
    for (const auto* stage : {"ingest", "regress", "bootstrap", "compare", "tests"})
        if (fs::exists(c.out_dir / stage))
            for (const auto& entry : fs::recursive_directory_iterator(c.out_dir / stage))
                if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files)
        manifest["artifacts"][fs::relative(f, c.out_dir).generic_string()] = hex64(file_digest(f));
    write_text(dir / "run_manifest.json", manifest.dump(2) + "\n");
}

fs::path stage_synth(const RunConfig& c)
{
    auto synth = c.synth;
    synth.seed = c.require_seed();
    synth.window = c.window;
    const auto data = generate(synth);
    const auto dir = fs::absolute(c.out_dir / "synth");
    const auto paths = write_synth(dir, data, c.hash());

    RunConfig run = c;
    run.electrodes = paths.electrodes;
    run.ground_truth = paths.truth;
    for (int a = 0; a < 2; ++a) {
        run.alignments[a].events = paths.events[a];
        run.alignments[a].responses = paths.responses[a];
        run.alignments[a].signals.clear();
        run.alignments[a].features = paths.manifests[a];
    }
    if (run.slip_multimodal.empty()) run.slip_multimodal = synth_models::kMultimodal;
    if (run.slip_unimodal.empty()) run.slip_unimodal = synth_models::kVision;
    run.out_dir = fs::absolute(c.out_dir);
    const auto config_path = dir / "config.json";
    write_config(config_path, run);
    std::size_t n_el = 0;
    for (const auto n : synth.electrodes_per_class) n_el += n;
    std::cout << fmt::format("synth: {} events per alignment, {} electrodes; run config at {}\n", synth.n_events, n_el,
                             config_path.string());
    return config_path;
}

void run_all(const RunConfig& c)
{
    stage_ingest(c);
    stage_regress(c);
    stage_bootstrap(c);
    stage_compare(c);
    stage_tests(c);
    stage_report(c);
}

}  // namespace mmenc
