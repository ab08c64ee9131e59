#include "seeto/archive.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "seeto/error.hpp"

namespace seeto {

using nlohmann::json;

const TaskRecord* SourceArchive::find(const TaskId& id) const {
    for (const auto& r : records) {
        if (r.id == id) return &r;
    }
    return nullptr;
}

void SourceArchive::append(TaskRecord record) {
    if (find(record.id)) throw UsageError("SourceArchive::append: duplicate task id '" + record.id + "'");
    records.push_back(std::move(record));
}

namespace {

// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json state_to_json(const TaskState& s) {
    return {{"channels", s.channels}, {"height", s.height}, {"width", s.width}, {"frames", s.frames}};
}

TaskState state_from_json(const json& j) {
    TaskState s;
    s.channels = j.at("channels").get<std::size_t>();
    s.height = j.at("height").get<std::size_t>();
    s.width = j.at("width").get<std::size_t>();
    s.frames = j.at("frames").get<std::vector<std::vector<double>>>();
    return s;
}

json model_to_json(const GpModel& g) {
    json hyper = json::array();
    for (const auto& h : g.hyperparameters()) {
        hyper.push_back({{"length_scale", h.length_scale},
                         {"signal_variance", h.signal_variance},
                         {"noise_variance", h.noise_variance}});
    }
    json norm = json::array();
    for (const auto& n : g.normalization()) norm.push_back({{"mean", n.mean}, {"scale", n.scale}});
    return {{"inputs", g.inputs()}, {"targets", g.targets()}, {"hyperparameters", hyper}, {"normalization", norm}};
}

GpModel model_from_json(const json& j) {
    std::vector<GpHyperparameters> hyper;
    for (const auto& h : j.at("hyperparameters")) {
        hyper.push_back({h.at("length_scale").get<double>(), h.at("signal_variance").get<double>(),
                         h.at("noise_variance").get<double>()});
    }
    std::vector<TargetNormalization> norm;
    for (const auto& n : j.at("normalization")) norm.push_back({n.at("mean").get<double>(), n.at("scale").get<double>()});
    return GpModel::from_parameters(j.at("inputs").get<std::vector<DecisionVector>>(),
                                    j.at("targets").get<std::vector<std::vector<double>>>(), std::move(hyper),
                                    std::move(norm));
}

json record_to_json(const TaskRecord& r) {
    json data = json::array();
    for (const auto& s : r.dataset) {
        data.push_back({{"decision", s.decision},
                        {"objectives", s.objectives},
                        {"eval_index", s.eval_index},
                        {"task_id", s.task_id}});
    }
    return {{"id", r.id},
            {"state", state_to_json(r.state)},
            {"bounds", {{"lower", r.bounds.lower()}, {"upper", r.bounds.upper()}}},
            {"dataset", data},
            {"model", r.model ? model_to_json(*r.model) : json(nullptr)},
            {"metadata", r.metadata}};
}

TaskRecord record_from_json(const json& j) {
    TaskRecord r;
    r.id = j.at("id").get<std::string>();
    r.state = state_from_json(j.at("state"));
    r.state.validate();
    r.bounds = Bounds(j.at("bounds").at("lower").get<std::vector<double>>(),
                      j.at("bounds").at("upper").get<std::vector<double>>());
    for (const auto& s : j.at("dataset")) {
        EvaluatedSolution e;
        e.decision = s.at("decision").get<DecisionVector>();
        e.objectives = s.at("objectives").get<ObjectiveVector>();
        e.eval_index = s.at("eval_index").get<std::uint64_t>();
        e.task_id = s.at("task_id").get<std::string>();
        if (e.decision.size() != r.bounds.dim()) {
            throw ParseError("archive record '" + r.id + "': decision dimension differs from bounds", 0);
        }
        r.dataset.push_back(std::move(e));
    }
    if (!j.at("model").is_null()) r.model = std::make_shared<const GpModel>(model_from_json(j.at("model")));
    r.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    return r;
}

json embedder_to_json(const Embedder& e) {
    std::vector<double> mean(e.mean().data(), e.mean().data() + e.mean().size());
    std::vector<std::vector<double>> basis;
    for (Eigen::Index c = 0; c < e.basis().cols(); ++c) {
        basis.emplace_back(e.basis().col(c).data(), e.basis().col(c).data() + e.basis().rows());
    }
    return {{"channels", e.channels()}, {"height", e.height()},   {"width", e.width()},
            {"mean", mean},             {"basis", basis},         {"degenerate", e.degenerate()}};
}

Embedder embedder_from_json(const json& j) {
    const auto mean = j.at("mean").get<std::vector<double>>();
    const auto cols = j.at("basis").get<std::vector<std::vector<double>>>();
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(mean.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (cols[c].size() != mean.size()) throw ParseError("archive embedder: basis column has the wrong length", 0);
        for (std::size_t r = 0; r < mean.size(); ++r) {
            basis(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cols[c][r];
        }
    }
    return Embedder(j.at("channels").get<std::size_t>(), j.at("height").get<std::size_t>(),
                    j.at("width").get<std::size_t>(),
                    Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size())), basis,
                    j.at("degenerate").get<bool>());
}

std::size_t line_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) line += text[i] == '\n';
    return line;
}

}  // namespace

std::string archive_to_string(const SourceArchive& archive) {
    json recs = json::array();
    for (const auto& r : archive.records) {
        json body = record_to_json(r);
        recs.push_back({{"checksum", fnv1a_hex(body.dump())}, {"record", std::move(body)}});
    }
    json root = {{"format_version", archive.format_version},
                 {"embedder", archive.embedder ? embedder_to_json(*archive.embedder) : json(nullptr)},
                 {"records", recs}};
    return root.dump(1) + "\n";
}

SourceArchive archive_from_string(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("archive: malformed JSON: ") + e.what(), line_of(text, e.byte));
    }
    try {
        SourceArchive out;
        const int version = root.at("format_version").get<int>();
        if (version != SourceArchive::kFormatVersion) {
            throw MigrationError("archive: format version " + std::to_string(version) +
                                 " needs migration to version " + std::to_string(SourceArchive::kFormatVersion));
        }
        out.format_version = version;
        if (!root.at("embedder").is_null()) out.embedder = embedder_from_json(root.at("embedder"));
        std::size_t index = 0;
        for (const auto& entry : root.at("records")) {
            const auto& body = entry.at("record");
            if (entry.at("checksum").get<std::string>() != fnv1a_hex(body.dump())) {
                throw ChecksumError("archive: checksum mismatch in record " + std::to_string(index));
            }
            out.append(record_from_json(body));
            ++index;
        }
        return out;
    } catch (const json::exception& e) {
        throw ParseError(std::string("archive: invalid structure: ") + e.what(), 0);
    }
}

void save_archive(const SourceArchive& archive, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("save_archive: cannot open " + path.string());
    out << archive_to_string(archive);
    if (!out) throw Error("save_archive: write failed for " + path.string());
}

SourceArchive load_archive(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("load_archive: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return archive_from_string(ss.str());
}

}  // namespace seeto
