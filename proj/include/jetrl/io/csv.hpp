#pragma once

// CSV emitters and the readers the renderer and tests need. Every field is
// numeric or an enum label, so nothing is quoted. Floats use fixed six-decimal
// notation; missing values are written as "nan".

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "jetrl/errors.hpp"
#include "jetrl/eval.hpp"
#include "jetrl/trainer.hpp"
#include "jetrl/xai.hpp"

namespace jetrl {

inline std::string fmt6(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf);
    return s == "-0.000000" ? "0.000000" : s;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& body) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open file for writing", path.string());
    }
    out << body;
    if (!out) {
        throw IoError("failed writing file", path.string());
    }
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file", path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

// --- training metrics -------------------------------------------------------

inline constexpr const char* metrics_header = "step,epsilon,mean_reward,reward_std,mean_ep_length,loss,successes,failures";

inline std::string metrics_row_line(const MetricsRow& r) {
    return std::to_string(r.step) + "," + fmt6(r.epsilon) + "," + fmt6(r.mean_reward) + "," + fmt6(r.reward_std) +
           "," + fmt6(r.mean_ep_length) + "," + fmt6(r.loss) + "," + std::to_string(r.successes) + "," +
           std::to_string(r.failures) + "\n";
}

inline std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::string s = std::string(metrics_header) + "\n";
    for (const auto& r : rows) {
        s += metrics_row_line(r);
    }
    return s;
}

inline std::string training_episodes_csv(const std::vector<EpisodeSummary>& eps) {
    std::string s = "episode,end_step,length,total_reward,outcome\n";
    for (std::size_t i = 0; i < eps.size(); ++i) {
        s += std::to_string(i) + "," + std::to_string(eps[i].end_step) + "," + std::to_string(eps[i].length) + "," +
             fmt6(eps[i].total_reward) + "," + std::string(outcome_name(eps[i].outcome)) + "\n";
    }
    return s;
}

// --- evaluation episodes ----------------------------------------------------

inline constexpr const char* episode_header =
    "episode,step,x,y,heading,speed,action,reward,d_target,d_enemy,t_z,v_e,outcome";

inline std::string episode_csv(const std::vector<EpisodeLog>& logs) {
    std::string s = std::string(episode_header) + "\n";
    for (const auto& log : logs) {
        const std::string outcome(outcome_name(log.outcome));
        for (const auto& r : log.steps) {
            s += std::to_string(log.episode) + "," + std::to_string(r.step) + "," + fmt6(r.pos.x) + "," +
                 fmt6(r.pos.y) + "," + fmt6(r.heading) + "," + fmt6(r.speed) + "," +
                 std::to_string(index_of(r.action)) + "," + fmt6(r.reward) + "," + fmt6(r.d_target) + "," +
                 fmt6(r.d_enemy) + "," + (r.t_z ? "1" : "0") + "," + (r.v_e ? "1" : "0") + "," + outcome + "\n";
        }
    }
    return s;
}

inline void write_episode_csv(const std::vector<EpisodeLog>& logs, const std::filesystem::path& path) {
    write_text_file(path, episode_csv(logs));
}

/// Per-episode facts the step table cannot carry (placements, seed).
inline std::string episode_meta_csv(const std::vector<EpisodeLog>& logs) {
    std::string s = "episode,seed,target_x,target_y,enemy_x,enemy_y,length,total_reward,outcome\n";
    for (const auto& l : logs) {
        s += std::to_string(l.episode) + "," + std::to_string(l.seed) + "," + fmt6(l.target_pos.x) + "," +
             fmt6(l.target_pos.y) + "," + fmt6(l.enemy_pos.x) + "," + fmt6(l.enemy_pos.y) + "," +
             std::to_string(l.length) + "," + fmt6(l.total_reward) + "," + std::string(outcome_name(l.outcome)) +
             "\n";
    }
    return s;
}

/// Sidecar path used for episode metadata: `episodes.csv` -> `episodes_meta.csv`.
inline std::filesystem::path meta_path_for(const std::filesystem::path& episode_csv_path) {
    auto p = episode_csv_path;
    p.replace_filename(episode_csv_path.stem().string() + "_meta.csv");
    return p;
}

inline OutcomeKind parse_outcome(const std::string& s) {
    for (auto k : {OutcomeKind::Running, OutcomeKind::AgentDestroyed, OutcomeKind::TargetDestroyed,
                   OutcomeKind::Timeout}) {
        if (s == outcome_name(k)) {
            return k;
        }
    }
    throw DomainError("unknown outcome label: " + s);
}

/// Reads an episode table (and its metadata sidecar when present) back into logs.
inline std::vector<EpisodeLog> read_episode_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line) || line != episode_header) {
        throw IoError("not an episode CSV (header mismatch)", path.string());
    }
    std::vector<EpisodeLog> logs;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 13) {
            throw IoError("malformed row at line " + std::to_string(line_no), path.string());
        }
        const std::int64_t ep = std::stoll(f[0]);
        if (logs.empty() || logs.back().episode != ep) {
            logs.emplace_back();
            logs.back().episode = ep;
        }
        EpisodeLog& log = logs.back();
        StepRecord r;
        r.step = std::stoi(f[1]);
        r.pos = {std::stod(f[2]), std::stod(f[3])};
        r.heading = std::stod(f[4]);
        r.speed = std::stod(f[5]);
        r.action = action_from_index(std::stoul(f[6]));
        r.reward = std::stod(f[7]);
        r.d_target = std::stod(f[8]);
        r.d_enemy = std::stod(f[9]);
        r.t_z = f[10] == "1";
        r.v_e = f[11] == "1";
        log.outcome = parse_outcome(f[12]);
        log.steps.push_back(r);
        log.total_reward += r.reward;
        log.length = static_cast<std::int32_t>(log.steps.size());
    }
    const auto meta = meta_path_for(path);
    if (std::filesystem::exists(meta)) {
        std::istringstream min(read_text_file(meta));
        std::getline(min, line);
        while (std::getline(min, line)) {
            if (line.empty()) {
                continue;
            }
            const auto f = split_csv_line(line);
            if (f.size() != 9) {
                throw IoError("malformed metadata row", meta.string());
            }
            const std::int64_t ep = std::stoll(f[0]);
            for (auto& log : logs) {
                if (log.episode == ep) {
                    log.seed = std::stoull(f[1]);
                    log.target_pos = {std::stod(f[2]), std::stod(f[3])};
                    log.enemy_pos = {std::stod(f[4]), std::stod(f[5])};
                    log.total_reward = std::stod(f[7]);
                }
            }
        }
    }
    return logs;
}

inline std::string eval_summary_csv(const EvalStats& s) {
    return "episodes,successes,failures,success_rate,mean_length,median_length,mean_total_reward\n" +
           std::to_string(s.episodes) + "," + std::to_string(s.successes) + "," + std::to_string(s.failures) + "," +
           fmt6(s.success_rate) + "," + fmt6(s.mean_length) + "," + fmt6(s.median_length) + "," +
           fmt6(s.mean_total_reward) + "\n";
}

// --- explainability ---------------------------------------------------------

inline std::string heatmap_csv(const HeatmapMatrix& m) {
    std::string s = "action";
    for (auto name : action_names) {
        s += "," + std::string(name);
    }
    s += ",count\n";
    for (std::size_t i = 0; i < action_count; ++i) {
        s += std::string(action_names[i]);
        for (std::size_t j = 0; j < action_count; ++j) {
            s += "," + (m.present(i) ? fmt6(m.mean[i][j]) : std::string("nan"));
        }
        s += "," + std::to_string(m.count[i]) + "\n";
    }
    return s;
}

inline void write_heatmap_csv(const HeatmapMatrix& m, const std::filesystem::path& path) {
    write_text_file(path, heatmap_csv(m));
}

inline HeatmapMatrix read_heatmap_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    std::getline(in, line);
    HeatmapMatrix m;
    for (std::size_t i = 0; i < action_count; ++i) {
        if (!std::getline(in, line)) {
            throw IoError("heatmap CSV has fewer than six rows", path.string());
        }
        const auto f = split_csv_line(line);
        if (f.size() != action_count + 2 || f[0] != action_names[i]) {
            throw IoError("malformed heatmap row " + std::to_string(i), path.string());
        }
        m.count[i] = std::stoll(f[action_count + 1]);
        for (std::size_t j = 0; j < action_count; ++j) {
            m.mean[i][j] = m.count[i] > 0 ? std::stod(f[j + 1]) : 0.0;
        }
    }
    return m;
}

inline std::string contrast_csv(const ContrastTable& t) {
    std::string s = "action,mean_factual,mean_counterfactual,count\n";
    for (std::size_t i = 0; i < action_count; ++i) {
        s += std::string(action_names[i]) + ",";
        if (t[i]) {
            s += fmt6(t[i]->mean_factual) + "," + fmt6(t[i]->mean_counterfactual) + "," + std::to_string(t[i]->count);
        } else {
            s += "nan,nan,0";
        }
        s += "\n";
    }
    return s;
}

inline std::string distribution_csv(const ActionCounts& counts) {
    std::string s = "action,count\n";
    for (std::size_t i = 0; i < action_count; ++i) {
        s += std::string(action_names[i]) + "," + std::to_string(counts[i]) + "\n";
    }
    return s;
}

inline std::string counterfactual_records_csv(const std::vector<CfRecord>& records) {
    std::string s = "episode,step,chosen_action,factual_reward";
    for (std::size_t j = 0; j < action_count; ++j) s += ",cf_" + std::to_string(j);
    for (std::size_t j = 0; j < action_count; ++j) s += ",q_" + std::to_string(j);
    s += "\n";
    for (const auto& r : records) {
        s += std::to_string(r.episode) + "," + std::to_string(r.step) + "," + std::to_string(r.chosen_action) + "," +
             fmt6(r.factual_reward);
        for (double v : r.cf_rewards) s += "," + fmt6(v);
        for (float v : r.q_values) s += "," + fmt6(v);
        s += "\n";
    }
    return s;
}

} // namespace jetrl
