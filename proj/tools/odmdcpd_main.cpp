#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "odmdcpd/cpd.hpp"
#include "odmdcpd/csv.hpp"
#include "odmdcpd/datagen.hpp"
#include "odmdcpd/evaluation.hpp"
#include "odmdcpd/rank.hpp"

namespace fs = std::filesystem;
using namespace odmdcpd;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

std::vector<std::string> split_names(const std::string& csv) {
    std::vector<std::string> names;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) names.push_back(item);
    }
    return names;
}

struct StreamData {
    Eigen::MatrixXd states;    // m x n
    Eigen::MatrixXd controls;  // l x n
    std::vector<double> timestamps;
    std::vector<std::string> timestamp_text;
};

StreamData load_stream(const std::string& path, const std::vector<std::string>& state_cols,
                       const std::vector<std::string>& control_cols,
                       const std::string& timestamp_col) {
    const CsvTable table = read_csv(path);

    std::vector<int> sidx, cidx;
    for (const auto& name : state_cols) {
        const int i = table.column_index(name);
        if (i < 0) throw ConfigError(path + ": no state column '" + name + "'");
        sidx.push_back(i);
    }
    for (const auto& name : control_cols) {
        const int i = table.column_index(name);
        if (i < 0) throw ConfigError(path + ": no control column '" + name + "'");
        cidx.push_back(i);
    }
    int tidx = -1;
    if (!timestamp_col.empty()) {
        tidx = table.column_index(timestamp_col);
        if (tidx < 0) throw ConfigError(path + ": no timestamp column '" + timestamp_col + "'");
    }

    const std::size_t n = table.rows.size();
    StreamData data;
    data.states.resize(static_cast<int>(sidx.size()), n);
    data.controls.resize(static_cast<int>(cidx.size()), n);
    data.timestamps.resize(n);
    data.timestamp_text.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& row = table.rows[k];
        const std::size_t line = k + 2;  // header is line 1
        for (std::size_t i = 0; i < sidx.size(); ++i)
            data.states(static_cast<int>(i), k) =
                parse_number(row[sidx[i]], line, table.header[sidx[i]]);
        for (std::size_t i = 0; i < cidx.size(); ++i)
            data.controls(static_cast<int>(i), k) =
                parse_number(row[cidx[i]], line, table.header[cidx[i]]);
        if (tidx >= 0) {
            data.timestamps[k] = parse_timestamp(row[tidx], line);
            data.timestamp_text[k] = row[tidx];
        } else {
            data.timestamps[k] = static_cast<double>(k);
            data.timestamp_text[k] = std::to_string(k);
        }
    }
    return data;
}

struct RunSettings {
    std::vector<std::string> inputs;
    std::string output = "scores.csv";
    std::string out_dir;
    std::string state_cols;
    std::string control_cols;
    std::string timestamp_col;
    std::string control_matrix_path;
    int batch = 1;
    int jobs = 1;
    CpdConfig cpd;
    std::string score_basis = "pod";
    std::string score_mode = "both";
};

void echo_config(const std::string& path, const RunSettings& rs, const std::string& input) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "input=" << input << "\n";
    out << "state-cols=" << rs.state_cols << "\n";
    out << "control-cols=" << rs.control_cols << "\n";
    out << "timestamp-col=" << rs.timestamp_col << "\n";
    out << "control-matrix=" << rs.control_matrix_path << "\n";
    out << "batch=" << rs.batch << "\n";
    out << "base=" << rs.cpd.layout.base << "\n";
    out << "gap=" << rs.cpd.layout.gap << "\n";
    out << "test=" << rs.cpd.layout.test << "\n";
    out << "learn=" << rs.cpd.layout.learn << "\n";
    out << "delays=" << rs.cpd.hankel.delays << "\n";
    out << "delay-stride=" << rs.cpd.hankel.delay_stride << "\n";
    out << "rank-state=" << rs.cpd.rank_state << "\n";
    out << "rank-control=" << rs.cpd.rank_control << "\n";
    out << "threshold=" << format_double(rs.cpd.threshold) << "\n";
    out << "rho=" << format_double(rs.cpd.rho) << "\n";
    out << "svd-tol=" << format_double(rs.cpd.svd_tol) << "\n";
    out << "score-basis=" << rs.score_basis << "\n";
    out << "score-mode=" << rs.score_mode << "\n";
}

void write_scores(const std::string& path, const std::vector<CpdScore>& scores,
                  const std::vector<std::string>& ts_text) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(scores.size());
    for (const CpdScore& s : scores) {
        const std::string ts = s.step < static_cast<long long>(ts_text.size())
                                   ? ts_text[static_cast<std::size_t>(s.step)]
                                   : format_double(s.timestamp);
        rows.push_back({std::to_string(s.step), ts, format_double(s.base_error),
                        format_double(s.test_error), format_double(s.ratio),
                        format_double(s.difference), s.alarm ? "1" : "0"});
    }
    write_csv(path, {"k", "timestamp", "e_base", "e_test", "q_ratio", "q_diff", "alarm"}, rows);
}

void run_one_stream(const RunSettings& rs, const std::string& input, const std::string& output) {
    const StreamData data = load_stream(input, split_names(rs.state_cols),
                                        split_names(rs.control_cols), rs.timestamp_col);
    const long long n = data.states.cols();

    CpdConfig cfg = rs.cpd;
    if (!rs.control_matrix_path.empty()) {
        const CsvTable btab = read_csv(rs.control_matrix_path);
        Eigen::MatrixXd braw(btab.rows.size(), btab.header.size());
        for (std::size_t i = 0; i < btab.rows.size(); ++i)
            for (std::size_t j = 0; j < btab.header.size(); ++j)
                braw(static_cast<int>(i), static_cast<int>(j)) =
                    parse_number(btab.rows[i][j], i + 2, "control-matrix");
        cfg.control_matrix = expand_control_matrix(braw, cfg.hankel);
    }

    std::vector<CpdScore> scores;
    if (n >= 2) {
        CpdEngine engine(static_cast<int>(data.states.rows()),
                         static_cast<int>(data.controls.rows()), cfg);
        // Snapshot pairs (x_t, x_{t+1}); the engine rejects batches larger
        // than the test window, so oversized requests are split here.
        const int step = std::max(1, std::min(rs.batch, cfg.layout.test));
        for (long long k = 0; k + 1 < n; k += step) {
            const int j = static_cast<int>(std::min<long long>(step, n - 1 - k));
            RawBatch batch;
            batch.states = data.states.middleCols(k, j);
            batch.shifted = data.states.middleCols(k + 1, j);
            batch.controls = data.controls.rows() > 0 ? data.controls.middleCols(k, j)
                                                      : Eigen::MatrixXd(0, j);
            batch.timestamps.assign(data.timestamps.begin() + k, data.timestamps.begin() + k + j);
            auto part = engine.step_batch(batch);
            scores.insert(scores.end(), part.begin(), part.end());
        }
    }
    write_scores(output, scores, data.timestamp_text);
    echo_config(output + ".config", rs, input);
}

int cmd_run(const RunSettings& rs) {
    if (rs.inputs.empty()) throw ConfigError("run: at least one --input required");
    if (rs.batch < 1) throw ConfigError("run: batch size must be >= 1");

    std::vector<std::pair<std::string, std::string>> work;
    if (rs.inputs.size() == 1) {
        fs::path out(rs.output);
        if (!rs.out_dir.empty() && out.is_relative()) out = fs::path(rs.out_dir) / out;
        work.emplace_back(rs.inputs[0], out.string());
    } else {
        // Several datasets: one scores file per input, named after it.
        const fs::path dir = rs.out_dir.empty() ? fs::path(".") : fs::path(rs.out_dir);
        for (const auto& in : rs.inputs)
            work.emplace_back(in, (dir / (fs::path(in).stem().string() + "_scores.csv")).string());
    }

    const int jobs = std::max(1, std::min<int>(rs.jobs, static_cast<int>(work.size())));
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::vector<std::pair<std::string, std::string>> failures;

    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < work.size(); i = next.fetch_add(1)) {
            try {
                run_one_stream(rs, work[i].first, work[i].second);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(err_mutex);
                failures.emplace_back(work[i].first, e.what());
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (const auto& [input, what] : failures)
        std::cerr << "error: " << input << ": " << what << "\n";
    if (!failures.empty()) return kExitData;
    for (const auto& [input, output] : work)
        std::cout << input << " -> " << output << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming change-point detection via truncated online DMD with control"};
    app.require_subcommand(1);

    // ---- generate ----------------------------------------------------
    auto* gen = app.add_subcommand("generate", "Generate a synthetic benchmark stream");
    std::string gen_kind;
    std::string gen_dir = ".";
    StepsSpec steps;
    TwoTankSpec tanks;
    std::uint64_t gen_seed = 0;
    long long gen_total = -1;
    bool no_noise = false, no_faults = false;
    gen->add_option("--kind", gen_kind, "steps | two-tank")->required();
    gen->add_option("--output-dir", gen_dir, "Output directory")->envname("ODMDCPD_OUT_DIR");
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--n", gen_total, "Number of snapshots");
    gen->add_option("--noise-std", steps.noise_std, "Steps: Gaussian noise std");
    gen->add_option("--step-size", steps.base_step, "Steps: base step increment");
    gen->add_option("--spacing", steps.spacing, "Steps: snapshots between steps");
    gen->add_option("--num-steps", steps.num_steps, "Steps: number of steps");
    gen->add_option("--noise-var", tanks.noise_var, "Two-tank: observation noise variance");
    gen->add_option("--control-epoch", tanks.control_epoch, "Two-tank: samples per command level");
    gen->add_option("--control-max", tanks.control_max, "Two-tank: command upper bound");
    gen->add_flag("--no-noise", no_noise, "Disable observation noise");
    gen->add_flag("--no-faults", no_faults, "Two-tank: disable fault injection");

    // ---- run ----------------------------------------------------------
    auto* run = app.add_subcommand("run", "Replay a CSV stream through the detector");
    RunSettings rs;
    run->set_config("--config", "", "Flat key=value config file; flags override");
    run->add_option("--input", rs.inputs, "Input CSV path(s)")->required();
    run->add_option("--output", rs.output, "Scores CSV path (single input)");
    run->add_option("--output-dir", rs.out_dir, "Output directory")->envname("ODMDCPD_OUT_DIR");
    run->add_option("--state-cols", rs.state_cols, "Comma-separated state columns")->required();
    run->add_option("--control-cols", rs.control_cols, "Comma-separated control columns");
    run->add_option("--timestamp-col", rs.timestamp_col, "Timestamp column (ISO-8601 or index)");
    run->add_option("--control-matrix", rs.control_matrix_path,
                    "CSV with the raw control matrix B (enables compensation)");
    run->add_option("--batch", rs.batch, "Mini-batch size j");
    run->add_option("--jobs", rs.jobs, "Parallel workers across inputs");
    run->add_option("--base", rs.cpd.layout.base, "Base window size a");
    run->add_option("--gap", rs.cpd.layout.gap, "Gap b between base and test");
    run->add_option("--test", rs.cpd.layout.test, "Test window size c");
    run->add_option("--learn", rs.cpd.layout.learn, "Learning window size d");
    run->add_option("--delays", rs.cpd.hankel.delays, "Time-delay depth h");
    run->add_option("--delay-stride", rs.cpd.hankel.delay_stride, "Delay stride h_d");
    run->add_option("--rank-state", rs.cpd.rank_state, "Reduced state rank p");
    run->add_option("--rank-control", rs.cpd.rank_control, "Reduced control rank q");
    run->add_option("--threshold", rs.cpd.threshold, "Alarm threshold t on the ratio score");
    run->add_option("--rho", rs.cpd.rho, "RLS prior scale");
    run->add_option("--svd-tol", rs.cpd.svd_tol, "Online SVD tolerance (<0: auto)");
    run->add_option("--score-basis", rs.score_basis, "pod | modes");
    run->add_option("--score-mode", rs.score_mode, "ratio | diff | both");

    // ---- eval -----------------------------------------------------------
    auto* ev = app.add_subcommand("eval", "Score alarms against labels (NAB, right-of-CP windows)");
    std::string ev_scores, ev_labels, ev_profile = "standard", ev_column = "ratio";
    std::string ev_output = "report.csv";
    double ev_threshold = -1.0;
    long long ev_window = -1;
    bool ev_sweep = false;
    ev->add_option("--scores", ev_scores, "Scores CSV from `run`")->required();
    ev->add_option("--labels", ev_labels, "Label file, one change-point index per line")->required();
    ev->add_option("--profile", ev_profile, "standard | lowFP | lowFN");
    ev->add_option("--column", ev_column, "ratio | diff statistic for thresholding");
    ev->add_option("--threshold", ev_threshold, "Recompute alarms at this threshold");
    ev->add_flag("--sweep", ev_sweep, "Sweep thresholds, report the best");
    ev->add_option("--window-length", ev_window, "Scoring window length L (default span/(10*labels))");
    ev->add_option("--output", ev_output, "Report CSV path");

    // ---- suggest-rank -----------------------------------------------
    auto* sr = app.add_subcommand("suggest-rank", "Hard-threshold rank suggestion for a stream");
    std::string sr_input, sr_state_cols, sr_control_cols;
    int sr_window = 100;
    HankelConfig sr_hankel;
    sr->add_option("--input", sr_input, "Input CSV path")->required();
    sr->add_option("--state-cols", sr_state_cols, "Comma-separated state columns")->required();
    sr->add_option("--control-cols", sr_control_cols, "Comma-separated control columns");
    sr->add_option("--window", sr_window, "Window size a (embedded columns used)");
    sr->add_option("--delays", sr_hankel.delays, "Time-delay depth h");
    sr->add_option("--delay-stride", sr_hankel.delay_stride, "Delay stride h_d");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            fs::create_directories(gen_dir);
            GeneratedSeries series;
            std::vector<std::string> header;
            std::string stem;
            if (gen_kind == "steps") {
                if (gen_total > 0) steps.total = gen_total;
                steps.seed = gen_seed;
                if (no_noise) steps.noise_std = 0.0;
                series = generate_steps(steps);
                header = {"timestamp", "x0"};
                stem = "steps";
            } else if (gen_kind == "two-tank") {
                if (gen_total > 0) tanks.total = gen_total;
                tanks.seed = gen_seed;
                tanks.with_noise = !no_noise;
                tanks.with_faults = !no_faults;
                series = simulate_two_tanks(tanks);
                header = {"timestamp", "h1", "h2", "q"};
                stem = "two_tank";
            } else {
                throw ConfigError("generate: unknown kind '" + gen_kind + "'");
            }

            std::vector<std::vector<std::string>> rows;
            const long long n = series.states.cols();
            for (long long k = 0; k < n; ++k) {
                std::vector<std::string> row{format_double(series.timestamps[k])};
                for (int i = 0; i < series.states.rows(); ++i)
                    row.push_back(format_double(series.states(i, k)));
                for (int i = 0; i < series.controls.rows(); ++i)
                    row.push_back(format_double(series.controls(i, k)));
                rows.push_back(std::move(row));
            }
            const std::string data_path = (fs::path(gen_dir) / (stem + ".csv")).string();
            const std::string label_path = (fs::path(gen_dir) / (stem + "_labels.csv")).string();
            write_csv(data_path, header, rows);
            std::vector<long long> labels = series.labels;
            labels.insert(labels.end(), series.label_ends.begin(), series.label_ends.end());
            std::sort(labels.begin(), labels.end());
            write_labels(label_path, labels);
            std::cout << data_path << "\n" << label_path << "\n";
            return 0;
        }

        if (run->parsed()) {
            if (rs.score_basis == "pod") rs.cpd.score_basis = ScoreBasis::PodSubspace;
            else if (rs.score_basis == "modes") rs.cpd.score_basis = ScoreBasis::DmdModes;
            else throw ConfigError("run: unknown score basis '" + rs.score_basis + "'");
            if (rs.score_mode == "ratio") rs.cpd.score_mode = ScoreMode::Ratio;
            else if (rs.score_mode == "diff") rs.cpd.score_mode = ScoreMode::Difference;
            else if (rs.score_mode == "both") rs.cpd.score_mode = ScoreMode::Both;
            else throw ConfigError("run: unknown score mode '" + rs.score_mode + "'");
            return cmd_run(rs);
        }

        if (ev->parsed()) {
            const CsvTable table = read_csv(ev_scores);
            const int kcol = table.column_index("k");
            const int rcol = table.column_index("q_ratio");
            const int dcol = table.column_index("q_diff");
            const int acol = table.column_index("alarm");
            if (kcol < 0 || rcol < 0 || dcol < 0 || acol < 0)
                throw DataError(ev_scores + ": not a scores file (expected k,q_ratio,q_diff,alarm)");

            std::vector<CpdScore> scores;
            for (std::size_t i = 0; i < table.rows.size(); ++i) {
                CpdScore s;
                s.step = static_cast<long long>(parse_number(table.rows[i][kcol], i + 2, "k"));
                s.ratio = parse_number(table.rows[i][rcol], i + 2, "q_ratio");
                s.difference = parse_number(table.rows[i][dcol], i + 2, "q_diff");
                s.alarm = parse_number(table.rows[i][acol], i + 2, "alarm") != 0.0;
                scores.push_back(s);
            }
            std::vector<long long> labels = read_labels(ev_labels);
            std::sort(labels.begin(), labels.end());
            if (labels.empty()) throw DataError(ev_labels + ": no labels");

            long long window = ev_window;
            if (window < 1) {
                const long long span = scores.empty() ? 0 : scores.back().step;
                window = default_window_length(std::max<long long>(span, 1), labels.size());
            }
            const bool use_diff = ev_column == "diff";
            const NabProfile profile = NabProfile::by_name(ev_profile);

            double chosen_threshold = ev_threshold;
            std::vector<long long> alarms;
            if (ev_sweep) {
                const ThresholdSweep sweep =
                    sweep_threshold(scores, labels, profile, window, 201, use_diff);
                chosen_threshold = sweep.best_threshold;
                std::cout << "best threshold " << chosen_threshold << " (profile " << ev_profile
                          << ", score " << sweep.best_score << ")\n";
            }
            for (const CpdScore& s : scores) {
                const bool fire = chosen_threshold >= 0.0
                                      ? (use_diff ? s.difference : s.ratio) > chosen_threshold
                                      : s.alarm;
                if (fire) alarms.push_back(s.step);
            }

            ScoringRun srun{alarms, labels, window};
            ScoringRun perfect{labels, labels, window};
            ScoringRun null_run{{}, labels, window};
            std::vector<std::vector<std::string>> rows;
            auto add_row = [&](const std::string& name, const ScoringRun& r) {
                rows.push_back({name, format_double(nab_score(r, NabProfile::standard())),
                                format_double(nab_score(r, NabProfile::low_fp())),
                                format_double(nab_score(r, NabProfile::low_fn()))});
            };
            add_row("perfect detector", perfect);
            add_row("cpd-dmd", srun);
            add_row("null detector", null_run);
            write_csv(ev_output, {"algorithm", "nab_standard", "nab_low_fp", "nab_low_fn"}, rows);

            std::cout << "nab(" << ev_profile << ") = " << nab_score(srun, profile) << " over "
                      << alarms.size() << " alarms, window " << window << " -> " << ev_output
                      << "\n";
            return 0;
        }

        if (sr->parsed()) {
            const StreamData data = load_stream(sr_input, split_names(sr_state_cols),
                                                split_names(sr_control_cols), "");
            Eigen::MatrixXd raw(data.states.rows() + data.controls.rows(), data.states.cols());
            raw.topRows(data.states.rows()) = data.states;
            raw.bottomRows(data.controls.rows()) = data.controls;
            const Eigen::MatrixXd embedded = hankelize(raw, sr_hankel);
            if (embedded.cols() < sr_window)
                throw DataError("suggest-rank: only " + std::to_string(embedded.cols()) +
                                " embedded columns available, need " + std::to_string(sr_window));
            const RankSuggestion sug = suggest_rank(embedded.leftCols(sr_window));
            if (sug.ratio_inverted)
                std::cerr << "warning: window holds fewer columns than embedded rows; "
                             "aspect ratio inverted\n";
            std::cout << "suggested rank r = " << sug.rank << "\n"
                      << "hard threshold = " << sug.threshold << "\n"
                      << "kept energy = " << sug.kept_energy << "\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const StateError& e) {
        std::cerr << "state error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
