#include "napmg/model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace napmg {

const ProtocolParams& ModelParams::for_size(std::size_t max_message_bytes) const {
    if (max_message_bytes < short_max) return short_protocol;
    if (max_message_bytes < eager_max) return eager_protocol;
    return rendezvous_protocol;
}

void ModelParams::validate() const {
    for (const ProtocolParams* p : {&short_protocol, &eager_protocol, &rendezvous_protocol}) {
        if (p->rate_nid <= 0 || p->rate_proc <= 0 || p->rate_local <= 0)
            throw std::invalid_argument("model params: rates must be positive");
        if (p->alpha < 0 || p->alpha_local < 0)
            throw std::invalid_argument("model params: latencies must be non-negative");
    }
    if (short_max >= eager_max)
        throw std::invalid_argument("model params: protocol thresholds must be strictly increasing");
}

ModelParams ModelParams::from_file(const std::string& path, std::string* counters_mode_out) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open model params file");

    ModelParams params;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string key, eq, value;
        std::istringstream ls(line);
        if (!(ls >> key)) continue;
        if (!(ls >> eq)) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing value");
        if (eq == "=") {
            if (!(ls >> value))
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing value");
        } else {
            value = eq;
        }

        if (key == "model_counters") {
            counters_mode_from_string(value); // validates
            if (counters_mode_out) *counters_mode_out = value;
            continue;
        }
        if (key == "threshold.short_max" || key == "threshold.eager_max") {
            std::size_t bytes = 0;
            try {
                bytes = std::stoull(value);
            } catch (const std::exception&) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad byte count '" +
                                         value + "'");
            }
            (key == "threshold.short_max" ? params.short_max : params.eager_max) = bytes;
            continue;
        }

        std::string cls, field = key;
        const auto dot = key.find('.');
        if (dot != std::string::npos) {
            cls = key.substr(0, dot);
            field = key.substr(dot + 1);
        }
        std::vector<ProtocolParams*> targets;
        if (cls.empty())
            targets = {&params.short_protocol, &params.eager_protocol, &params.rendezvous_protocol};
        else if (cls == "short")
            targets = {&params.short_protocol};
        else if (cls == "eager")
            targets = {&params.eager_protocol};
        else if (cls == "rendezvous")
            targets = {&params.rendezvous_protocol};
        else
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown protocol class '" + cls + "'");

        double v = 0.0;
        try {
            v = std::stod(value);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad number '" + value + "'");
        }
        for (ProtocolParams* p : targets) {
            if (field == "alpha")
                p->alpha = v;
            else if (field == "alpha_local")
                p->alpha_local = v;
            else if (field == "rate_nid")
                p->rate_nid = v;
            else if (field == "rate_proc")
                p->rate_proc = v;
            else if (field == "rate_local")
                p->rate_local = v;
            else
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    params.validate();
    return params;
}

double max_rate_adjusted(double n_messages, double s_node, double s_proc, const ProtocolParams& p) {
    if (n_messages < 0 || s_node < 0 || s_proc < 0)
        throw std::invalid_argument("max_rate_adjusted: negative counters");
    if (s_proc > s_node)
        throw std::invalid_argument("max_rate_adjusted: s_proc exceeds s_node");
    return p.alpha * n_messages + std::max(s_node / p.rate_nid, s_proc / p.rate_proc);
}

double max_rate(double n_messages, double s_bytes, int ppn, const ProtocolParams& p) {
    if (ppn < 1) throw std::invalid_argument("max_rate: ppn must be >= 1");
    // ppn*s / min(R_N, ppn*R_b) == max(ppn*s/R_N, s/R_b)
    return max_rate_adjusted(n_messages, static_cast<double>(ppn) * s_bytes, s_bytes, p);
}

double postal(double n_messages, double s_bytes, const ProtocolParams& p) {
    if (n_messages < 0 || s_bytes < 0)
        throw std::invalid_argument("postal: negative counters");
    return p.alpha_local * n_messages + s_bytes / p.rate_local;
}

ModelEstimate model_standard(const CommCounters& c, const ModelParams& params) {
    ModelEstimate e;
    e.strategy = Strategy::standard;
    if (c.no_communication()) return e;
    const ProtocolParams& p = params.for_size(c.max_message_bytes);
    e.latency = p.alpha * c.n_proc;
    e.bandwidth = std::max(static_cast<double>(c.s_node) / p.rate_nid,
                           static_cast<double>(c.s_proc) / p.rate_proc);
    e.total = e.latency + e.bandwidth + e.intra;
    return e;
}

ModelEstimate model_nap2(const CommCounters& c, const ModelParams& params) {
    ModelEstimate e;
    e.strategy = Strategy::nap2;
    if (c.no_communication()) return e;
    const ProtocolParams& p = params.for_size(c.max_message_bytes);
    e.latency = p.alpha * c.n_proc2node;
    e.bandwidth = std::max(static_cast<double>(c.s_node) / p.rate_nid,
                           static_cast<double>(c.s_proc) / p.rate_proc);
    if (c.ppn > 1)
        e.intra = p.alpha_local * (c.ppn - 1) + static_cast<double>(c.s_proc) / p.rate_local;
    e.total = e.latency + e.bandwidth + e.intra;
    return e;
}

ModelEstimate model_nap3(const CommCounters& c, const ModelParams& params) {
    ModelEstimate e;
    e.strategy = Strategy::nap3;
    if (c.no_communication()) return e;
    const ProtocolParams& p = params.for_size(c.max_message_bytes);
    e.latency = p.alpha * c.n_node2node / c.ppn;
    e.bandwidth = std::max(static_cast<double>(c.s_node) / p.rate_nid,
                           static_cast<double>(c.s_node2node) / p.rate_proc);
    if (c.ppn > 1)
        e.intra = 2.0 * (p.alpha_local * (c.ppn - 1) +
                         static_cast<double>(c.s_node2node) / p.rate_local);
    e.total = e.latency + e.bandwidth + e.intra;
    return e;
}

const char* to_string(CountersMode m) {
    return m == CountersMode::schedule ? "schedule" : "pattern";
}

CountersMode counters_mode_from_string(const std::string& name) {
    if (name == "schedule") return CountersMode::schedule;
    if (name == "pattern") return CountersMode::pattern;
    throw std::invalid_argument("unknown counters mode '" + name + "'");
}

const ModelEstimate& StrategyEvaluation::estimate(Strategy s) const {
    switch (s) {
        case Strategy::standard: return standard;
        case Strategy::nap2: return nap2;
        case Strategy::nap3: return nap3;
    }
    throw std::logic_error("bad strategy");
}

const CommCounters& StrategyEvaluation::counters(Strategy s) const {
    switch (s) {
        case Strategy::standard: return counters_standard;
        case Strategy::nap2: return counters_nap2;
        case Strategy::nap3: return counters_nap3;
    }
    throw std::logic_error("bad strategy");
}

namespace {

StrategyEvaluation evaluate(const CommPattern& pattern, const Topology& topo,
                            const ModelParams& params, CountersMode mode,
                            const std::function<MessageLog(const CommSchedule&)>& size_log) {
    params.validate();
    StrategyEvaluation ev;
    CommCounters* counters[] = {&ev.counters_standard, &ev.counters_nap2, &ev.counters_nap3};
    const Strategy strategies[] = {Strategy::standard, Strategy::nap2, Strategy::nap3};
    for (int i = 0; i < 3; ++i) {
        const CommSchedule sched = build_schedule(strategies[i], pattern, topo);
        *counters[i] = counters_from(size_log(sched), topo);
    }
    if (mode == CountersMode::pattern) {
        // Byte counters taken from the standard schedule for every strategy;
        // only the message-count structure differs per strategy.
        for (CommCounters* c : {&ev.counters_nap2, &ev.counters_nap3}) {
            c->s_proc = ev.counters_standard.s_proc;
            c->s_node = ev.counters_standard.s_node;
            c->s_node2node = ev.counters_standard.s_node2node;
            c->max_message_bytes = ev.counters_standard.max_message_bytes;
        }
    }
    ev.standard = model_standard(ev.counters_standard, params);
    ev.nap2 = model_nap2(ev.counters_nap2, params);
    ev.nap3 = model_nap3(ev.counters_nap3, params);

    ev.chosen = Strategy::standard;
    double best = ev.standard.total;
    if (ev.nap2.total < best) {
        ev.chosen = Strategy::nap2;
        best = ev.nap2.total;
    }
    if (ev.nap3.total < best) ev.chosen = Strategy::nap3;
    return ev;
}

} // namespace

StrategyEvaluation evaluate_vector_strategies(const CommPattern& pattern, const Topology& topo,
                                              const ModelParams& params, CountersMode mode) {
    return evaluate(pattern, topo, params, mode,
                    [](const CommSchedule& s) { return vector_log(s); });
}

StrategyEvaluation evaluate_matrix_strategies(const CommPattern& pattern, const Topology& topo,
                                              const ModelParams& params, const RowSizeFn& row_nnz,
                                              CountersMode mode) {
    return evaluate(pattern, topo, params, mode,
                    [&row_nnz](const CommSchedule& s) { return matrix_log(s, row_nnz); });
}

Strategy select_strategy(const CommPattern& pattern, const Topology& topo,
                         const ModelParams& params, CountersMode mode) {
    return evaluate_vector_strategies(pattern, topo, params, mode).chosen;
}

} // namespace napmg
