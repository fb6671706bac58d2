#include "infopool/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace infopool {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line, int line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
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
    if (quoted) throw ParseError("line " + std::to_string(line_no) + ": unterminated quote");
    fields.push_back(std::move(field));
    return fields;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line_no, const std::string& what) {
    throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

double parse_probability(const std::string& text, int line_no) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) fail(line_no, "probability '" + text + "' is not a number");
    if (!(v >= 0.0 && v <= 1.0)) fail(line_no, "probability " + text + " outside [0, 1]");
    return v;
}


}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

ForecastTable read_forecast_table(std::istream& is) {
    ForecastTable table;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line, line_no);
        if (!header_seen) {
            header_seen = true;
            if (fields.size() < 3 || trim(fields[0]) != "event_id" ||
                trim(fields[1]) != "forecaster_id" || trim(fields[2]) != "probability" ||
                (fields.size() > 3 && trim(fields[3]) != "outcome") || fields.size() > 4)
                fail(line_no, "expected header event_id,forecaster_id,probability,outcome");
            continue;
        }
        if (fields.size() < 3 || fields.size() > 4) fail(line_no, "expected 3 or 4 fields");
        ForecastRow row;
        row.event_id = trim(fields[0]);
        row.forecaster_id = trim(fields[1]);
        if (row.event_id.empty()) fail(line_no, "empty event_id");
        row.probability = parse_probability(trim(fields[2]), line_no);
        if (fields.size() == 4) {
            const std::string o = trim(fields[3]);
            if (o == "0" || o == "1")
                row.outcome = o == "1" ? 1 : 0;
            else if (!o.empty())
                fail(line_no, "outcome must be 0, 1 or blank");
        }
        table.push_back(std::move(row));
    }
    if (!header_seen) throw ParseError("line 1: missing header");
    return table;
}

void write_forecast_table(std::ostream& os, const ForecastTable& table) {
    os << "event_id,forecaster_id,probability,outcome\n";
    for (const auto& r : table) {
        os << csv_field(r.event_id) << ',' << csv_field(r.forecaster_id) << ','
           << format_double(r.probability) << ',';
        if (r.outcome) os << *r.outcome;
        os << '\n';
    }
}

std::vector<ForecastSet> group_events(const ForecastTable& table) {
    std::vector<ForecastSet> events;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& r : table) {
        auto [it, inserted] = index.emplace(r.event_id, events.size());
        if (inserted) {
            events.push_back(ForecastSet{r.event_id, {}, r.outcome});
        }
        ForecastSet& e = events[it->second];
        if (!inserted && e.outcome != r.outcome)
            throw DomainError("event '" + r.event_id + "' has inconsistent outcomes");
        e.forecasts.push_back(r.probability);
    }
    return events;
}

json to_json(const InfoStructure& s) {
    json j;
    const int n = s.n();
    std::vector<double> delta(n);
    std::vector<std::vector<double>> rho(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i) {
        delta[i] = s.delta(i);
        for (int k = 0; k < n; ++k) rho[i][k] = s.rho(i, k);
    }
    j["delta"] = delta;
    j["rho"] = rho;
    if (s.delta_prime()) j["delta_prime"] = *s.delta_prime();
    return j;
}

InfoStructure structure_from_json(const json& j) {
    try {
        std::optional<double> dp;
        if (j.contains("delta_prime") && !j["delta_prime"].is_null()) dp = j["delta_prime"].get<double>();
        if (j.contains("compound")) {
            const auto& c = j["compound"];
            const CompoundSymmetry cs{c.at("n").get<int>(), c.at("delta").get<double>(),
                                      c.at("lambda").get<double>()};
            return cs.structure(dp);
        }
        const auto delta = j.at("delta").get<std::vector<double>>();
        const auto n = static_cast<Eigen::Index>(delta.size());
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
        if (j.contains("rho")) {
            const auto rho = j["rho"].get<std::vector<std::vector<double>>>();
            if (static_cast<Eigen::Index>(rho.size()) != n)
                throw DomainError("structure: rho must be n x n");
            for (Eigen::Index i = 0; i < n; ++i) {
                if (static_cast<Eigen::Index>(rho[i].size()) != n)
                    throw DomainError("structure: rho must be n x n");
                for (Eigen::Index k = 0; k < n; ++k) m(i, k) = rho[i][k];
            }
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            if (j.contains("rho") && std::fabs(m(i, i) - delta[i]) > 1e-12)
                throw DomainError("structure: rho diagonal must equal delta");
            m(i, i) = delta[i];
        }
        return InfoStructure(m, dp);
    } catch (const json::exception& e) {
        throw DomainError(std::string("structure JSON: ") + e.what());
    }
}

json to_json(const CellMassPartition& p) {
    json cells = json::array();
    for (const auto& [subset, mass] : p.cells())
        cells.push_back({{"subset", subset_members(subset)}, {"mass", mass}});
    return {{"n", p.n()}, {"cells", cells}, {"outside", p.outside()}};
}

CellMassPartition partition_from_json(const json& j) {
    try {
        std::map<Subset, double> cells;
        for (const auto& c : j.at("cells")) {
            const auto members = c.at("subset").get<std::vector<int>>();
            cells[subset_from_members(members)] += c.at("mass").get<double>();
        }
        return CellMassPartition(j.at("n").get<int>(), std::move(cells), j.at("outside").get<double>());
    } catch (const json::exception& e) {
        throw DomainError(std::string("partition JSON: ") + e.what());
    }
}

bool is_partition_json(const json& j) { return j.is_object() && j.contains("cells"); }

json to_json(const CoherenceVerdict& v) {
    json j{{"verdict", to_string(v.verdict)}, {"residual", v.residual}};
    if (v.realization) j["realization"] = to_json(*v.realization);
    if (v.certificate) {
        const auto& c = *v.certificate;
        std::vector<std::vector<double>> w(c.weights.rows(), std::vector<double>(c.weights.cols()));
        for (Eigen::Index i = 0; i < c.weights.rows(); ++i)
            for (Eigen::Index k = 0; k < c.weights.cols(); ++k) w[i][k] = c.weights(i, k);
        j["certificate"] = {{"constant", c.constant}, {"weights", w}, {"union_weight", c.union_weight}};
    }
    return j;
}

json to_json(const NecessaryVerdict& v) {
    return {{"verdict", v.verdict == Verdict::coherent ? "pass" : to_string(v.verdict)},
            {"reason", v.reason},
            {"violation", v.violation}};
}

json to_json(const AggregateResult& r) {
    return {{"value", r.value}, {"method", to_string(r.method)}, {"diagnostics", r.diagnostics}};
}

json to_json(const MleResult& r) {
    json j{{"delta_hat", r.delta_hat},
           {"lambda_hat", r.lambda_hat ? json(*r.lambda_hat) : json(nullptr)},
           {"log_likelihood", r.log_likelihood},
           {"at_boundary",
            {{"delta_lower", r.at_boundary.delta_lower},
             {"delta_upper", r.at_boundary.delta_upper},
             {"lambda_lower", r.at_boundary.lambda_lower},
             {"lambda_upper", r.at_boundary.lambda_upper}}},
           {"trace",
            {{"grid_evaluations", r.trace.grid_evaluations},
             {"iterations", r.trace.iterations},
             {"evaluations", r.trace.evaluations},
             {"converged", r.trace.converged}}}};
    return j;
}

json to_json(const ScoreReport& r) {
    json bins = json::array();
    for (const auto& b : r.bins)
        bins.push_back({{"lower", b.lower}, {"upper", b.upper}, {"f", b.mean_forecast},
                        {"n", b.count}, {"o", b.frequency}});
    return {{"bs", r.bs},   {"raw_bs", r.raw_bs}, {"rel", r.rel}, {"res", r.res},
            {"unc", r.unc}, {"o_bar", r.o_bar},   {"k", r.k},     {"bins", bins}};
}

json to_json(const CauchyLaw& law) {
    return {{"x0", law.x0}, {"gamma", law.gamma_scale}};
}

}  // namespace infopool
