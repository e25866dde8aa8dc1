#include "drfr/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "drfr/error.hpp"
#include "drfr/psd.hpp"
#include "wire.hpp"

namespace drfr {
namespace {

using nlohmann::json;

void write_matrix(wire::Writer& w, const Matrix& m) {
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) w.f64(m(r, c));
    }
}

Matrix read_matrix(wire::Reader& r, const char* where) {
    const auto rows = r.u32(where);
    const auto cols = r.u32(where);
    if (rows == 0 || cols == 0 || static_cast<std::uint64_t>(rows) * cols > (1ull << 28)) {
        throw DataError(std::string("implausible matrix shape in ") + where);
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64(where);
    }
    return m;
}

json hyper_to_json(const Hyperparams& h) {
    json j;
    j["k_neighbors"] = h.k_neighbors;
    j["bandwidth_t"] = h.bandwidth_t ? json(*h.bandwidth_t) : json("auto");
    j["age_epsilon"] = h.age_epsilon;
    j["margin_delta"] = h.margin_delta;
    j["graph_weight"] = h.graph_weight;
    j["equality_weight"] = h.equality_weight;
    j["retrieve_lambda"] = h.retrieve_lambda;
    j["learning_rate"] = h.learning_rate;
    j["momentum"] = h.momentum;
    j["batch_size"] = h.batch_size;
    j["epochs"] = h.epochs;
    j["embed_dim"] = h.embed_dim;
    j["seed"] = h.seed;
    return j;
}

Hyperparams hyper_from_json(const json& j) {
    Hyperparams h;
    h.k_neighbors = j.at("k_neighbors").get<int>();
    const auto& t = j.at("bandwidth_t");
    if (t.is_string()) {
        if (t.get<std::string>() != "auto") throw DataError("bandwidth_t must be a number or auto");
        h.bandwidth_t.reset();
    } else {
        h.bandwidth_t = t.get<double>();
    }
    h.age_epsilon = j.at("age_epsilon").get<int>();
    h.margin_delta = j.at("margin_delta").get<double>();
    h.graph_weight = j.at("graph_weight").get<double>();
    h.equality_weight = j.at("equality_weight").get<double>();
    h.retrieve_lambda = j.at("retrieve_lambda").get<double>();
    h.learning_rate = j.at("learning_rate").get<double>();
    h.momentum = j.at("momentum").get<double>();
    h.batch_size = j.at("batch_size").get<int>();
    h.epochs = j.at("epochs").get<int>();
    h.embed_dim = j.at("embed_dim").get<int>();
    h.seed = j.at("seed").get<std::uint64_t>();
    return h;
}

}  // namespace

void write_checkpoint(std::ostream& out, const ModelCheckpoint& checkpoint) {
    const auto& model = checkpoint.model;
    if (model.embedding.weights().size() == 0) throw InvalidArgument("checkpoint has no model");
    check_compatible(model, model.embedding.in_dim());

    wire::Writer w(out);
    w.bytes(ModelCheckpoint::kMagic, 4);
    w.u16(ModelCheckpoint::kVersion);
    w.u8(static_cast<std::uint8_t>(model.embedding.kind()));
    write_matrix(w, model.embedding.weights());
    write_matrix(w, model.metric.age.factor());
    write_matrix(w, model.metric.ind.factor());
    w.string(hyper_to_json(checkpoint.hyper).dump());
    if (!out) throw DataError("checkpoint write failed");
}

ModelCheckpoint read_checkpoint(std::istream& in) {
    wire::Reader r(in);
    char magic[4];
    r.bytes(magic, 4, "checkpoint header");
    if (std::memcmp(magic, ModelCheckpoint::kMagic, 4) != 0) {
        throw DataError("bad magic: not a DRFR model checkpoint");
    }
    ModelCheckpoint ckpt;
    ckpt.version = r.u16("checkpoint header");
    if (ckpt.version != ModelCheckpoint::kVersion) {
        throw DataError("unsupported checkpoint version " + std::to_string(ckpt.version));
    }
    const auto kind = r.u8("checkpoint header");
    if (kind > static_cast<std::uint8_t>(EmbeddingKind::PCA)) {
        throw DataError("unknown embedding kind " + std::to_string(kind));
    }
    try {
        Matrix w = read_matrix(r, "embedding weights");
        Matrix l_age = read_matrix(r, "age metric");
        Matrix l_ind = read_matrix(r, "individual metric");
        ckpt.model = Model{EmbeddingModel(static_cast<EmbeddingKind>(kind), std::move(w)),
                           DualMetric(MetricFactor(std::move(l_age)), MetricFactor(std::move(l_ind)))};
        check_compatible(ckpt.model, ckpt.model.embedding.in_dim());
    } catch (const InvalidArgument& e) {
        throw DataError(std::string("inconsistent checkpoint: ") + e.what());
    }
    const auto text = r.string("hyperparameters");
    try {
        ckpt.hyper = hyper_from_json(json::parse(text));
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed checkpoint hyperparameters: ") + e.what());
    }
    if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes in checkpoint");
    return ckpt;
}

void save_checkpoint(const ModelCheckpoint& checkpoint, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    write_checkpoint(out, checkpoint);
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
    try {
        return read_checkpoint(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string describe(const ModelCheckpoint& checkpoint) {
    const auto& m = checkpoint.model;
    std::ostringstream out;
    out << "format version: " << checkpoint.version << '\n'
        << "embedding: " << to_string(m.embedding.kind()) << ' ' << m.embedding.out_dim() << 'x'
        << m.embedding.in_dim() << '\n'
        << "age metric L: " << m.metric.age.out_dim() << 'x' << m.metric.age.in_dim()
        << ", min eigenvalue of M " << min_eigenvalue(m.metric.age.mahalanobis_matrix()) << '\n'
        << "individual metric L: " << m.metric.ind.out_dim() << 'x' << m.metric.ind.in_dim()
        << ", min eigenvalue of M " << min_eigenvalue(m.metric.ind.mahalanobis_matrix()) << '\n'
        << "hyperparameters: " << hyper_to_json(checkpoint.hyper).dump() << '\n';
    return out.str();
}

}  // namespace drfr
