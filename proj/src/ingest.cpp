#include "felis/ingest.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <unordered_set>

#include "felis/csv.hpp"
#include "felis/error.hpp"
#include "felis/image_io.hpp"
#include "felis/npy.hpp"
#include "felis/random.hpp"

namespace fs = std::filesystem;

namespace felis::ingest {

std::string to_string(PairStatus status) {
    switch (status) {
        case PairStatus::Ok: return "ok";
        case PairStatus::MissingCounterpart: return "missing-counterpart";
        case PairStatus::Corrupt: return "corrupt";
        case PairStatus::NonRgb: return "non-rgb";
    }
    return "unknown";
}

PairStatus parse_pair_status(const std::string& text) {
    for (PairStatus s : {PairStatus::Ok, PairStatus::MissingCounterpart, PairStatus::Corrupt,
                         PairStatus::NonRgb}) {
        if (to_string(s) == text) return s;
    }
    throw InvalidInput("unknown pair status '" + text + "'");
}

std::vector<PairRecord> PairManifest::usable() const {
    std::vector<PairRecord> out;
    for (const auto& r : records) {
        if (r.status == PairStatus::Ok) out.push_back(r);
    }
    return out;
}

std::size_t PairManifest::count(PairStatus status) const {
    std::size_t n = 0;
    for (const auto& r : records) n += r.status == status ? 1 : 0;
    return n;
}

namespace {

std::map<std::string, fs::path> image_tree(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw InvalidInput("directory " + root.string() + " is not readable");
    }
    std::map<std::string, fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file() || !io::has_image_extension(entry.path())) continue;
        files.emplace(fs::relative(entry.path(), root).generic_string(), entry.path());
    }
    return files;
}

PairStatus classify(const fs::path& a, const fs::path& b) {
    const auto pa = io::probe_image(a).status;
    const auto pb = io::probe_image(b).status;
    if (pa == io::DecodeStatus::Corrupt || pb == io::DecodeStatus::Corrupt) {
        return PairStatus::Corrupt;
    }
    if (pa == io::DecodeStatus::NonRgb || pb == io::DecodeStatus::NonRgb) {
        return PairStatus::NonRgb;
    }
    return PairStatus::Ok;
}

}  // namespace

PairManifest build_manifest(const fs::path& human_dir, const fs::path& cat_dir) {
    const auto human = image_tree(human_dir);
    const auto cat = image_tree(cat_dir);

    std::map<std::string, PairRecord> joined;
    for (const auto& [id, path] : human) {
        joined[id] = {id, path.generic_string(), "", PairStatus::MissingCounterpart};
    }
    for (const auto& [id, path] : cat) {
        auto [it, inserted] = joined.try_emplace(id);
        PairRecord& rec = it->second;
        rec.pair_id = id;
        rec.cat_path = path.generic_string();
        rec.status = inserted ? PairStatus::MissingCounterpart
                              : classify(human.at(id), path);
    }
    PairManifest manifest;
    manifest.records.reserve(joined.size());
    for (auto& [id, rec] : joined) manifest.records.push_back(std::move(rec));
    return manifest;
}

void write_manifest(std::ostream& out, const PairManifest& manifest) {
    out << "pair_id,human_path,cat_path,status\n";
    for (const auto& r : manifest.records) {
        out << csv::join({r.pair_id, r.human_path, r.cat_path, to_string(r.status)}) << '\n';
    }
}

void write_manifest(const fs::path& path, const PairManifest& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidInput("cannot write manifest " + path.string());
    }
    write_manifest(out, manifest);
}

PairManifest read_manifest(const fs::path& path) {
    const csv::Table table = csv::read(path);
    const std::size_t id = table.column("pair_id");
    const std::size_t human = table.column("human_path");
    const std::size_t cat = table.column("cat_path");
    const std::size_t status = table.column("status");
    PairManifest manifest;
    for (const auto& row : table.rows) {
        manifest.records.push_back({row[id], row[human], row[cat], parse_pair_status(row[status])});
    }
    return manifest;
}

bool in_golden_subset(const std::string& pair_id, std::uint64_t k, std::uint64_t seed) {
    if (k <= 1) return true;
    return stats::stable_hash(pair_id, seed) % k == 0;
}

std::vector<std::string> read_sidecar(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open sidecar " + path.string());
    }
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ids.push_back(line);
    }
    return ids;
}

void write_sidecar(const fs::path& path, const std::vector<std::string>& ids) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidInput("cannot write sidecar " + path.string());
    }
    for (const auto& id : ids) out << id << '\n';
}

FeatureMatrix load_feature_matrix(const fs::path& npy_path, const fs::path& sidecar_path) {
    Matrix values = npy::read(npy_path);
    if (values.rows() == 0) {
        throw InvalidInput("feature file " + npy_path.string() + " has no rows");
    }
    std::vector<std::string> ids = read_sidecar(sidecar_path);
    if (static_cast<Eigen::Index>(ids.size()) != values.rows()) {
        throw InvalidInput("sidecar " + sidecar_path.string() + " lists " +
                           std::to_string(ids.size()) + " ids but " + npy_path.string() + " has " +
                           std::to_string(values.rows()) + " rows");
    }
    return FeatureMatrix(std::move(values), std::move(ids));
}

RawActivation RawActivation::feature_map(std::size_t h, std::size_t w, std::size_t c,
                                         std::vector<double> values) {
    RawActivation raw;
    raw.kind = Kind::Map;
    raw.rows = h;
    raw.cols = w;
    raw.channels = c;
    raw.values = std::move(values);
    raw.validate();
    return raw;
}

RawActivation RawActivation::tokens(std::size_t t, std::size_t e, bool has_class_token,
                                    std::vector<double> values) {
    RawActivation raw;
    raw.kind = Kind::Tokens;
    raw.rows = t;
    raw.cols = e;
    raw.has_class_token = has_class_token;
    raw.values = std::move(values);
    raw.validate();
    return raw;
}

void RawActivation::validate() const {
    const std::size_t expected = kind == Kind::Map ? rows * cols * channels : rows * cols;
    if (rows == 0 || cols == 0 || (kind == Kind::Map && channels == 0)) {
        throw InvalidInput("activation has an empty dimension");
    }
    if (values.size() != expected) {
        throw InvalidInput("activation holds " + std::to_string(values.size()) +
                           " values, shape requires " + std::to_string(expected));
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw InvalidInput("activation contains a non-finite value");
    }
}

Eigen::VectorXd vectorize(const RawActivation& raw) {
    raw.validate();
    if (raw.kind == RawActivation::Kind::Map) {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(raw.channels));
        const std::size_t cells = raw.rows * raw.cols;
        for (std::size_t cell = 0; cell < cells; ++cell) {
            for (std::size_t c = 0; c < raw.channels; ++c) {
                out(static_cast<Eigen::Index>(c)) += raw.values[cell * raw.channels + c];
            }
        }
        return out / static_cast<double>(cells);
    }
    const auto e = static_cast<Eigen::Index>(raw.cols);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> tokens(
        raw.values.data(), static_cast<Eigen::Index>(raw.rows), e);
    if (raw.has_class_token) return tokens.row(0).transpose();
    return tokens.colwise().mean().transpose();
}

LayerTable make_layer_table(std::string model, std::string layer, FeatureMatrix human,
                            FeatureMatrix cat) {
    const std::string name = model + "." + layer;
    if (human.pair_ids.size() != cat.pair_ids.size()) {
        throw InvalidInput("layer " + name + ": " + std::to_string(human.pair_ids.size()) +
                           " human rows vs " + std::to_string(cat.pair_ids.size()) + " cat rows");
    }
    for (std::size_t i = 0; i < human.pair_ids.size(); ++i) {
        if (human.pair_ids[i] != cat.pair_ids[i]) {
            throw InvalidInput("layer " + name + ": pair ids misaligned at row " +
                               std::to_string(i) + " ('" + human.pair_ids[i] + "' vs '" +
                               cat.pair_ids[i] + "')");
        }
    }
    if (human.d() != cat.d()) {
        throw InvalidInput("layer " + name + ": feature dimensions differ");
    }
    return {std::move(model), std::move(layer), std::move(human), std::move(cat)};
}

LayerTable golden_subset(const LayerTable& table, std::uint64_t k, std::uint64_t seed) {
    std::vector<Eigen::Index> keep;
    for (std::size_t i = 0; i < table.human.pair_ids.size(); ++i) {
        if (in_golden_subset(table.human.pair_ids[i], k, seed)) {
            keep.push_back(static_cast<Eigen::Index>(i));
        }
    }
    return {table.model, table.layer, table.human.select(keep), table.cat.select(keep)};
}

std::vector<LayerManifestRow> read_layer_manifest(const fs::path& path) {
    const csv::Table table = csv::read(path);
    const std::size_t model = table.column("model");
    const std::size_t layer = table.column("layer");
    const std::size_t human = table.column("human_feature_path");
    const std::size_t cat = table.column("cat_feature_path");
    const std::size_t sidecar = table.column("sidecar_path");
    const fs::path base = path.parent_path();
    const auto resolve = [&](const std::string& p) {
        const fs::path candidate(p);
        return (candidate.is_absolute() ? candidate : base / candidate).string();
    };
    std::vector<LayerManifestRow> rows;
    for (const auto& r : table.rows) {
        rows.push_back({r[model], r[layer], resolve(r[human]), resolve(r[cat]), resolve(r[sidecar])});
    }
    return rows;
}

void write_layer_manifest(const fs::path& path, const std::vector<LayerManifestRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidInput("cannot write layer manifest " + path.string());
    }
    out << "model,layer,human_feature_path,cat_feature_path,sidecar_path\n";
    for (const auto& r : rows) {
        out << csv::join({r.model, r.layer, r.human_feature_path, r.cat_feature_path,
                          r.sidecar_path})
            << '\n';
    }
}

}  // namespace felis::ingest
