// opacity: command-line front end.
//   ingest    lexicon + frequency list -> corpus JSON
//   measure   corpus -> compressibility results, traces, manifest
//   validate  synthetic monotonicity suites -> report
//   report    results CSVs -> summaries, Tukey tables, plot spec
//
// Exit codes: 0 success, 1 measurement/property failure, 2 usage/input
// error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "opacity/corpus.hpp"
#include "opacity/decompose.hpp"
#include "opacity/manifest.hpp"
#include "opacity/prequential.hpp"
#include "opacity/report.hpp"
#include "opacity/stats.hpp"
#include "opacity/validate.hpp"

namespace fs = std::filesystem;
using namespace opacity;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for writing: " + path.string());
    f << content;
    if (!f) throw Error("write failed: " + path.string());
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            seeds.push_back(std::stoull(item));
        } catch (const std::exception&) {
            throw Error("invalid seed '" + item + "'");
        }
    }
    if (seeds.empty()) throw Error("empty seed list");
    return seeds;
}

std::vector<Direction> parse_directions(const std::string& text) {
    if (text == "both")
        return {Direction::orth_to_phon, Direction::phon_to_orth};
    return {direction_from_string(text)};
}

/// Model/replay defaults from --model-config or $OPACITY_CONFIG
/// (JSON with optional "model" and "replay" objects).
void load_external_config(const std::string& explicit_path, ModelConfig& model,
                          ReplayConfig& replay,
                          std::vector<std::string>* loaded_from) {
    std::string path = explicit_path;
    if (path.empty()) {
        const char* env = std::getenv("OPACITY_CONFIG");
        if (env && *env) path = env;
    }
    if (path.empty()) return;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("config " + path + ": " + e.what());
    }
    if (j.contains("model"))
        model = ModelConfig::from_json_text(j["model"].dump());
    if (j.contains("replay")) {
        replay.streams = j["replay"].value("streams", replay.streams);
        replay.batch_size = j["replay"].value("batch_size", replay.batch_size);
    }
    if (loaded_from) loaded_from->push_back(path);
}

RunManifest base_manifest(const std::string& command, int argc, char** argv) {
    RunManifest m;
    m.command = command;
    m.argv.assign(argv, argv + argc);
    m.timestamp = iso8601_now();
    return m;
}

struct IngestOptions {
    std::string lexicon, freq, out, language;
    std::string breadth = "broad";
    std::string script;
    std::string decompose;  // comma list: hangul,hanzi,nfd
    std::string hanzi_table;
    std::string hanzi_depth = "one-level";
    std::size_t top_n = 5032;
};

int run_ingest(const IngestOptions& opt, RunManifest manifest) {
    auto lexicon_text = read_file(opt.lexicon);
    auto freq_text = read_file(opt.freq);
    manifest.input_digests.emplace_back(opt.lexicon, file_digest(opt.lexicon));
    manifest.input_digests.emplace_back(opt.freq, file_digest(opt.freq));

    auto records = parse_pron_lexicon(lexicon_text);
    auto freqs = parse_frequency_list(freq_text);
    auto corpus =
        select_top_n(records, freqs, opt.top_n, opt.language, opt.breadth);
    if (corpus.truncated)
        std::cerr << "warning: only " << corpus.size()
                  << " unique forms available (requested " << opt.top_n
                  << ")\n";

    if (!opt.script.empty())
        corpus = filter_by_script(corpus, script_class(opt.script), opt.script);

    DecomposeConfig dc;
    {
        std::stringstream ss(opt.decompose);
        std::string stage;
        while (std::getline(ss, stage, ',')) {
            if (stage.empty()) continue;
            if (stage == "hangul")
                dc.hangul = true;
            else if (stage == "hanzi")
                dc.hanzi = true;
            else if (stage == "nfd")
                dc.nfd = true;
            else
                throw Error("unknown decomposition stage: " + stage);
        }
    }
    if (opt.hanzi_depth == "one-level")
        dc.hanzi_depth = HanziDepth::one_level;
    else if (opt.hanzi_depth == "recursive")
        dc.hanzi_depth = HanziDepth::recursive;
    else
        throw Error("hanzi depth must be one-level or recursive");

    HanziTable table;
    if (dc.hanzi) {
        if (opt.hanzi_table.empty())
            throw Error("--decompose hanzi requires --hanzi-table");
        table = HanziTable::load(read_file(opt.hanzi_table));
        manifest.input_digests.emplace_back(opt.hanzi_table,
                                            file_digest(opt.hanzi_table));
    }
    if (dc.hangul || dc.hanzi || dc.nfd)
        corpus = apply_decomposition_pipeline(corpus, dc,
                                              dc.hanzi ? &table : nullptr);

    corpus.save(opt.out);

    nlohmann::json cfg;
    cfg["top_n"] = opt.top_n;
    cfg["language"] = opt.language;
    cfg["breadth"] = opt.breadth;
    cfg["script"] = opt.script;
    cfg["decompose"] = opt.decompose;
    cfg["hanzi_depth"] = opt.hanzi_depth;
    cfg["entries"] = corpus.size();
    cfg["corpus_digest"] = corpus.digest();
    manifest.config_json = cfg.dump();
    manifest.save(opt.out + ".manifest.json");
    std::cerr << "wrote " << opt.out << " (" << corpus.size() << " entries)\n";
    return 0;
}

struct MeasureOptions {
    std::string corpus, out;
    std::string direction = "both";
    std::string seeds;
    std::string model_config;
    int batch_size = 32;
    int streams = 25;
    int workers = 1;
};

int run_measure(const MeasureOptions& opt, RunManifest manifest) {
    auto corpus = PairedCorpus::load(opt.corpus);
    manifest.input_digests.emplace_back(opt.corpus, file_digest(opt.corpus));

    ModelConfig model;
    ReplayConfig replay;
    std::vector<std::string> config_files;
    load_external_config(opt.model_config, model, replay, &config_files);
    for (const auto& p : config_files)
        manifest.input_digests.emplace_back(p, file_digest(p));
    replay.batch_size = opt.batch_size;
    replay.streams = opt.streams;
    replay.validate();

    auto directions = parse_directions(opt.direction);
    auto seeds =
        opt.seeds.empty() ? default_seeds() : parse_seed_list(opt.seeds);
    manifest.seeds = seeds;

    fs::create_directories(opt.out);
    auto runs = run_suite(corpus, directions, seeds, model, replay,
                          opt.workers);

    std::vector<CompressibilityResult> ok_results;
    bool any_failed = false;
    for (const auto& r : runs) {
        std::string label =
            to_string(r.direction) + "/seed=" + std::to_string(r.seed);
        manifest.outcomes.push_back({label, r.ok, r.error});
        if (!r.ok) {
            any_failed = true;
            std::cerr << "run failed: " << label << ": " << r.error << "\n";
            continue;
        }
        ok_results.push_back(r.result);
        std::string stem =
            "trace_" + to_string(r.direction) + "_" + std::to_string(r.seed);
        write_file(fs::path(opt.out) / (stem + "_cond.csv"),
                   trace_csv(r.conditional_trace));
        write_file(fs::path(opt.out) / (stem + "_uncond.csv"),
                   trace_csv(r.unconditional_trace));
    }
    write_file(fs::path(opt.out) / "results.csv", results_csv(ok_results));

    nlohmann::json cfg;
    cfg["model"] = nlohmann::json::parse(model.to_json());
    cfg["replay"] = {{"streams", replay.streams},
                     {"batch_size", replay.batch_size}};
    cfg["directions"] = opt.direction;
    cfg["corpus_digest"] = corpus.digest();
    cfg["workers"] = opt.workers;
    manifest.config_json = cfg.dump();
    manifest.save((fs::path(opt.out) / "manifest.json").string());

    std::cerr << "wrote " << ok_results.size() << "/" << runs.size()
              << " results to " << opt.out << "\n";
    return any_failed ? 1 : 0;
}

struct ValidateOptions {
    std::string config, out;
    int workers = 0;  // 0 = take from config
};

int run_validate(const ValidateOptions& opt, RunManifest manifest) {
    ValidateConfig cfg;
    if (!opt.config.empty()) {
        cfg = ValidateConfig::from_json_text(read_file(opt.config));
        manifest.input_digests.emplace_back(opt.config,
                                            file_digest(opt.config));
    }
    if (opt.workers > 0) cfg.workers = opt.workers;
    manifest.seeds = cfg.seeds;
    manifest.config_json = cfg.to_json();

    fs::create_directories(opt.out);
    auto report = run_validation(cfg, &std::cerr);
    write_file(fs::path(opt.out) / "validation_report.json", report.to_json());
    write_file(fs::path(opt.out) / "validation_report.txt", report.text());
    for (const auto& c : report.checks)
        manifest.outcomes.push_back({c.name, c.pass, c.pass ? "" : c.details});
    manifest.save((fs::path(opt.out) / "manifest.json").string());

    std::cout << report.text();
    return report.all_pass() ? 0 : 1;
}

struct ReportOptions {
    std::vector<std::string> results;
    std::string corpus;
    std::string out;
};

int run_report(const ReportOptions& opt, RunManifest manifest) {
    std::vector<CompressibilityResult> results;
    for (const auto& path : opt.results) {
        auto part = parse_results_csv(read_file(path));
        results.insert(results.end(), part.begin(), part.end());
        manifest.input_digests.emplace_back(path, file_digest(path));
    }
    if (results.empty()) throw Error("no result rows in inputs");

    fs::create_directories(opt.out);
    auto groups = aggregate(results);
    write_file(fs::path(opt.out) / "summary.csv", summary_csv(groups));
    write_file(fs::path(opt.out) / "plot_data.csv", summary_csv(groups));
    std::string spec = make_plot_spec_json(groups);
    validate_plot_spec(spec);
    write_file(fs::path(opt.out) / "plot_spec.json", spec);

    // Tukey tables per direction when two or more languages are present.
    for (Direction dir :
         {Direction::orth_to_phon, Direction::phon_to_orth}) {
        std::vector<std::pair<std::string, std::vector<double>>> by_lang;
        for (const auto& r : results) {
            if (r.direction != dir) continue;
            auto it = std::find_if(
                by_lang.begin(), by_lang.end(),
                [&](const auto& g) { return g.first == r.language; });
            if (it == by_lang.end())
                by_lang.push_back({r.language, {r.c}});
            else
                it->second.push_back(r.c);
        }
        if (by_lang.size() >= 2) {
            auto table = tukey_hsd(by_lang);
            write_file(fs::path(opt.out) /
                           ("pairwise_" + to_string(dir) + ".csv"),
                       table.csv());
        }
    }

    if (!opt.corpus.empty()) {
        auto corpus = PairedCorpus::load(opt.corpus);
        manifest.input_digests.emplace_back(opt.corpus,
                                            file_digest(opt.corpus));
        std::string csv = "direction,onset_entropy_bits\n";
        char buf[32];
        for (Direction dir :
             {Direction::orth_to_phon, Direction::phon_to_orth}) {
            std::snprintf(buf, sizeof buf, "%.17g",
                          onset_entropy(corpus, dir));
            csv += to_string(dir) + "," + buf + "\n";
        }
        write_file(fs::path(opt.out) / "onset_entropy.csv", csv);
    }

    nlohmann::json cfg;
    cfg["inputs"] = opt.results;
    cfg["rows"] = results.size();
    manifest.config_json = cfg.dump();
    manifest.save((fs::path(opt.out) / "manifest.json").string());
    std::cerr << "wrote report to " << opt.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "opacity: script-agnostic orthographic transparency via "
        "prequential mutual compressibility"};
    app.require_subcommand(1);

    IngestOptions ingest;
    auto* cmd_ingest = app.add_subcommand(
        "ingest", "Build a paired corpus from a pronunciation lexicon");
    cmd_ingest->add_option("--lexicon", ingest.lexicon,
                           "TSV: word<TAB>space-separated IPA segments")
        ->required();
    cmd_ingest->add_option("--freq", ingest.freq, "TSV: word<TAB>count")
        ->required();
    cmd_ingest->add_option("--top-n", ingest.top_n,
                           "Keep the n most frequent forms");
    cmd_ingest->add_option("--language", ingest.language, "Language tag");
    cmd_ingest->add_option("--breadth", ingest.breadth,
                           "Transcription breadth: broad|narrow");
    cmd_ingest->add_option("--script", ingest.script,
                           "Keep only entries written entirely in this "
                           "script class (hiragana|katakana|han|other); "
                           "applied before decomposition");
    cmd_ingest->add_option("--decompose", ingest.decompose,
                           "Comma list of stages: hangul,hanzi,nfd");
    cmd_ingest->add_option("--hanzi-table", ingest.hanzi_table,
                           "JSON-lines character decomposition database");
    cmd_ingest->add_option("--hanzi-depth", ingest.hanzi_depth,
                           "one-level|recursive");
    cmd_ingest->add_option("--out", ingest.out, "Output corpus JSON path")
        ->required();

    MeasureOptions measure;
    auto* cmd_measure = app.add_subcommand(
        "measure", "Run paired prequential measurements over seeds");
    cmd_measure->add_option("--corpus", measure.corpus, "Corpus JSON path")
        ->required();
    cmd_measure->add_option("--direction", measure.direction,
                            "o2p|p2o|both");
    cmd_measure->add_option("--seeds", measure.seeds,
                            "Comma-separated seed list (default 1..40)");
    cmd_measure->add_option("--batch-size", measure.batch_size, "Batch size");
    cmd_measure->add_option("--streams", measure.streams,
                            "Replay stream count k");
    cmd_measure->add_option("--workers", measure.workers,
                            "Parallel measurement workers");
    cmd_measure->add_option("--model-config", measure.model_config,
                            "JSON file with model/replay defaults "
                            "(also via $OPACITY_CONFIG)");
    cmd_measure->add_option("--out", measure.out, "Output directory")
        ->required();

    ValidateOptions validate;
    auto* cmd_validate = app.add_subcommand(
        "validate", "Synthetic irregularity/complexity validation suites");
    cmd_validate->add_option("--config", validate.config,
                             "Validation config JSON (defaults built in)");
    cmd_validate->add_option("--workers", validate.workers,
                             "Parallel measurement workers");
    cmd_validate->add_option("--out", validate.out, "Output directory")
        ->required();

    ReportOptions report;
    auto* cmd_report = app.add_subcommand(
        "report", "Aggregate results: summaries, Tukey tables, plot spec");
    cmd_report->add_option("--results", report.results,
                           "One or more results CSV files")
        ->required()
        ->expected(-1);
    cmd_report->add_option("--corpus", report.corpus,
                           "Corpus JSON for the onset-entropy baseline");
    cmd_report->add_option("--out", report.out, "Output directory")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(cmd_ingest))
            return run_ingest(ingest, base_manifest("ingest", argc, argv));
        if (app.got_subcommand(cmd_measure))
            return run_measure(measure, base_manifest("measure", argc, argv));
        if (app.got_subcommand(cmd_validate))
            return run_validate(validate,
                                base_manifest("validate", argc, argv));
        if (app.got_subcommand(cmd_report))
            return run_report(report, base_manifest("report", argc, argv));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
