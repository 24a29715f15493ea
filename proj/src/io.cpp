#include "wsdse/io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace wsdse::io {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kSchemaVersion = "1";

std::vector<char> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<char> data((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    return data;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("write failed: " + path.string());
}

json parse_json_file(const fs::path& path) {
    const auto data = read_file(path);
    json j = json::parse(data.begin(), data.end(), nullptr, false);
    if (j.is_discarded()) throw IoError("invalid JSON in " + path.string());
    return j;
}

void check_schema(const json& j, const fs::path& path) {
    if (!j.contains("schema_version") || j["schema_version"] != kSchemaVersion)
        throw IoError("unsupported schema_version in " + path.string());
}

float f32_from_le(const unsigned char* p) {
    const std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                            (static_cast<std::uint32_t>(p[1]) << 8) |
                            (static_cast<std::uint32_t>(p[2]) << 16) |
                            (static_cast<std::uint32_t>(p[3]) << 24);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

void f32_to_le(float f, unsigned char* p) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    p[0] = static_cast<unsigned char>(u & 0xff);
    p[1] = static_cast<unsigned char>((u >> 8) & 0xff);
    p[2] = static_cast<unsigned char>((u >> 16) & 0xff);
    p[3] = static_cast<unsigned char>((u >> 24) & 0xff);
}

std::uint32_t u32_from_be(const unsigned char* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) |
           (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

void u32_to_be(std::uint32_t u, unsigned char* p) {
    p[0] = static_cast<unsigned char>((u >> 24) & 0xff);
    p[1] = static_cast<unsigned char>((u >> 16) & 0xff);
    p[2] = static_cast<unsigned char>((u >> 8) & 0xff);
    p[3] = static_cast<unsigned char>(u & 0xff);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const fs::path& path) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw IoError("bad numeric field '" + s + "' in " + path.string());
    return v;
}

long parse_long(const std::string& s, const fs::path& path) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw IoError("bad integer field '" + s + "' in " + path.string());
    return v;
}

std::vector<std::string> read_csv_lines(const fs::path& path, const std::string& header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV: " + path.string());
    if (line != header)
        throw IoError("unexpected CSV header in " + path.string() + ": " + line);
    std::vector<std::string> lines;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

ModelSpec load_model(const fs::path& manifest_path, const fs::path& blob_path) {
    const json manifest = parse_json_file(manifest_path);
    check_schema(manifest, manifest_path);
    if (!manifest.contains("dtype") || manifest["dtype"] != "f32le")
        throw IoError("unsupported dtype in " + manifest_path.string());
    if (!manifest.contains("input_shape") || !manifest["input_shape"].is_array() ||
        manifest["input_shape"].size() != 3)
        throw IoError("missing/invalid input_shape in " + manifest_path.string());

    ModelSpec model;
    model.input_shape = {manifest["input_shape"][0].get<int>(),
                         manifest["input_shape"][1].get<int>(),
                         manifest["input_shape"][2].get<int>()};

    const auto blob = read_file(blob_path);
    if (blob.size() % 4 != 0)
        throw IoError("blob length not a multiple of 4: " + blob_path.string());
    std::size_t offset = 0; // element offset into the blob

    auto take = [&](std::size_t count, int layer_idx,
                    const char* what) -> std::vector<float> {
        if ((offset + count) * 4 > blob.size())
            throw IoError("blob too short for layer " + std::to_string(layer_idx) + " " +
                          what + " in " + blob_path.string());
        std::vector<float> out(count);
        const auto* p = reinterpret_cast<const unsigned char*>(blob.data()) + offset * 4;
        for (std::size_t i = 0; i < count; ++i) {
            out[i] = f32_from_le(p + i * 4);
            if (!std::isfinite(out[i]))
                throw IoError("non-finite value in layer " + std::to_string(layer_idx) +
                              " " + what);
        }
        offset += count;
        return out;
    };

    int li = 0;
    for (const auto& jl : manifest.at("layers")) {
        LayerSpec l;
        l.kind = layer_kind_from_name(jl.at("kind").get<std::string>());
        switch (l.kind) {
            case LayerKind::Conv2d: {
                const auto& kr = jl.at("kernel");
                if (!kr.is_array() || kr.size() != 4)
                    throw IoError("layer " + std::to_string(li) + ": conv2d kernel must be [kh,kw,in_ch,out_ch]");
                l.kh = kr[0].get<int>();
                l.kw = kr[1].get<int>();
                l.in_ch = kr[2].get<int>();
                l.out_ch = kr[3].get<int>();
                if (jl.value("stride", 1) != 1)
                    throw IoError("layer " + std::to_string(li) + ": only stride-1 conv is supported");
                if (jl.value("padding", std::string("valid")) != "valid")
                    throw IoError("layer " + std::to_string(li) + ": only valid padding is supported");
                l.weights = take(l.expected_weight_count(), li, "weights");
                if (jl.value("bias", true)) l.bias = take(l.expected_bias_count(), li, "bias");
                break;
            }
            case LayerKind::Dense:
                l.in_features = jl.at("in_features").get<int>();
                l.out_features = jl.at("out_features").get<int>();
                l.weights = take(l.expected_weight_count(), li, "weights");
                if (jl.value("bias", true)) l.bias = take(l.expected_bias_count(), li, "bias");
                break;
            case LayerKind::MaxPool:
            case LayerKind::AvgPool:
                l.window = jl.at("window").get<int>();
                l.stride = jl.at("stride").get<int>();
                break;
            default:
                break;
        }
        model.layers.push_back(std::move(l));
        ++li;
    }
    if (offset * 4 != blob.size())
        throw IoError("blob length mismatch: " + std::to_string(blob.size()) +
                      " bytes, manifest declares " + std::to_string(offset * 4));
    try {
        model.validate();
    } catch (const InvalidArgument& e) {
        throw IoError(std::string("model validation failed: ") + e.what());
    }
    return model;
}

void save_model(const ModelSpec& model, const fs::path& manifest_path,
                const fs::path& blob_path) {
    model.validate();
    json layers = json::array();
    json offsets = json::array();
    std::string blob;
    auto put = [&](const std::vector<float>& v) {
        const std::size_t at = blob.size();
        blob.resize(at + v.size() * 4);
        for (std::size_t i = 0; i < v.size(); ++i)
            f32_to_le(v[i], reinterpret_cast<unsigned char*>(blob.data()) + at + i * 4);
        return at;
    };
    for (int i = 0; i < static_cast<int>(model.layers.size()); ++i) {
        const LayerSpec& l = model.layers[i];
        json jl;
        jl["kind"] = layer_kind_name(l.kind);
        switch (l.kind) {
            case LayerKind::Conv2d:
                jl["kernel"] = {l.kh, l.kw, l.in_ch, l.out_ch};
                jl["stride"] = 1;
                jl["padding"] = "valid";
                jl["bias"] = !l.bias.empty();
                break;
            case LayerKind::Dense:
                jl["in_features"] = l.in_features;
                jl["out_features"] = l.out_features;
                jl["bias"] = !l.bias.empty();
                break;
            case LayerKind::MaxPool:
            case LayerKind::AvgPool:
                jl["window"] = l.window;
                jl["stride"] = l.stride;
                break;
            default:
                break;
        }
        if (l.weighted()) {
            json off;
            off["layer"] = i;
            off["weights"] = put(l.weights);
            if (!l.bias.empty()) off["bias"] = put(l.bias);
            offsets.push_back(off);
        }
        layers.push_back(jl);
    }
    json manifest;
    manifest["schema_version"] = kSchemaVersion;
    manifest["dtype"] = "f32le";
    manifest["input_shape"] = {model.input_shape.h, model.input_shape.w, model.input_shape.c};
    manifest["layers"] = layers;
    manifest["weight_blob_offsets"] = offsets;
    write_file(manifest_path, manifest.dump(2) + "\n");
    write_file(blob_path, blob);
}

std::vector<Tensor> load_idx_images(const fs::path& path) {
    const auto data = read_file(path);
    if (data.size() < 4) throw IoError("IDX file too short: " + path.string());
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    if (p[0] != 0 || p[1] != 0) throw IoError("bad IDX magic in " + path.string());
    if (p[2] != 0x08)
        throw IoError("unsupported IDX dtype 0x" + std::to_string(p[2]) + " in " +
                      path.string() + " (only unsigned byte is supported)");
    if (p[3] != 3)
        throw IoError("expected 3-dimensional IDX image file, got ndim " +
                      std::to_string(p[3]) + " in " + path.string());
    if (data.size() < 16) throw IoError("truncated IDX header: " + path.string());
    const std::uint32_t count = u32_from_be(p + 4);
    const std::uint32_t h = u32_from_be(p + 8);
    const std::uint32_t w = u32_from_be(p + 12);
    const std::size_t expect = 16 + static_cast<std::size_t>(count) * h * w;
    if (data.size() != expect)
        throw IoError("IDX payload length mismatch in " + path.string() + ": have " +
                      std::to_string(data.size()) + " bytes, expected " +
                      std::to_string(expect));
    std::vector<Tensor> out(count);
    const unsigned char* px = p + 16;
    for (std::uint32_t i = 0; i < count; ++i) {
        out[i].shape = {static_cast<int>(h), static_cast<int>(w), 1};
        out[i].data.resize(static_cast<std::size_t>(h) * w);
        for (std::size_t j = 0; j < out[i].data.size(); ++j)
            out[i].data[j] = static_cast<float>(*px++) / 255.0f;
    }
    return out;
}

std::vector<int> load_idx_labels(const fs::path& path) {
    const auto data = read_file(path);
    if (data.size() < 4) throw IoError("IDX file too short: " + path.string());
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    if (p[0] != 0 || p[1] != 0) throw IoError("bad IDX magic in " + path.string());
    if (p[2] != 0x08)
        throw IoError("unsupported IDX dtype in " + path.string());
    if (p[3] != 1)
        throw IoError("expected 1-dimensional IDX label file in " + path.string());
    if (data.size() < 8) throw IoError("truncated IDX header: " + path.string());
    const std::uint32_t count = u32_from_be(p + 4);
    if (data.size() != 8 + static_cast<std::size_t>(count))
        throw IoError("IDX payload length mismatch in " + path.string());
    std::vector<int> labels(count);
    for (std::uint32_t i = 0; i < count; ++i) labels[i] = p[8 + i];
    return labels;
}

void save_idx_images(const std::vector<Tensor>& images, const fs::path& path) {
    if (images.empty()) throw InvalidArgument("save_idx_images: no images");
    const Shape s = images.front().shape;
    if (s.c != 1) throw InvalidArgument("save_idx_images: images must be single-channel");
    std::string out(16, '\0');
    auto* p = reinterpret_cast<unsigned char*>(out.data());
    p[2] = 0x08;
    p[3] = 3;
    u32_to_be(static_cast<std::uint32_t>(images.size()), p + 4);
    u32_to_be(static_cast<std::uint32_t>(s.h), p + 8);
    u32_to_be(static_cast<std::uint32_t>(s.w), p + 12);
    for (const auto& img : images) {
        if (!(img.shape == s)) throw InvalidArgument("save_idx_images: ragged shapes");
        for (float v : img.data)
            out += static_cast<char>(static_cast<unsigned char>(
                std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)));
    }
    write_file(path, out);
}

void save_idx_labels(const std::vector<int>& labels, int /*count*/, const fs::path& path) {
    std::string out(8, '\0');
    auto* p = reinterpret_cast<unsigned char*>(out.data());
    p[2] = 0x08;
    p[3] = 1;
    u32_to_be(static_cast<std::uint32_t>(labels.size()), p + 4);
    for (int l : labels) {
        if (l < 0 || l > 255) throw InvalidArgument("save_idx_labels: label out of byte range");
        out += static_cast<char>(static_cast<unsigned char>(l));
    }
    write_file(path, out);
}

void save_curve_csv(const SensitivityCurve& curve, const fs::path& path) {
    std::string out = "layer,k,b_index,al_pp,cr,inertia\n";
    for (const auto& p : curve.points) {
        out += std::to_string(curve.layer) + "," + std::to_string(p.k) + "," +
               std::to_string(p.b_index) + "," + format_double(p.al) + "," +
               format_double(p.cr) + "," + format_double(p.inertia) + "\n";
    }
    write_file(path, out);
}

SensitivityCurve load_curve_csv(const fs::path& path) {
    SensitivityCurve curve;
    for (const auto& line : read_csv_lines(path, "layer,k,b_index,al_pp,cr,inertia")) {
        const auto f = split(line, ',');
        if (f.size() != 6) throw IoError("bad CSV row in " + path.string());
        curve.layer = static_cast<int>(parse_long(f[0], path));
        CurvePoint p;
        p.k = static_cast<int>(parse_long(f[1], path));
        p.b_index = static_cast<int>(parse_long(f[2], path));
        p.al = parse_double(f[3], path);
        p.cr = parse_double(f[4], path);
        p.inertia = parse_double(f[5], path);
        curve.points.push_back(p);
    }
    return curve;
}

void save_results_csv(const std::vector<EvalRecord>& records, const fs::path& path) {
    std::string out = "ktuple,al_pp,al_source,cr,inertia_sum\n";
    for (const auto& r : records) {
        out += r.ktuple.str() + "," + format_double(r.al) + "," +
               al_source_name(r.al_source) + "," + format_double(r.cr) + "," +
               format_double(r.inertia_sum()) + "\n";
    }
    write_file(path, out);
}

std::vector<EvalRecord> load_results_csv(const fs::path& path) {
    std::vector<EvalRecord> records;
    for (const auto& line : read_csv_lines(path, "ktuple,al_pp,al_source,cr,inertia_sum")) {
        const auto f = split(line, ',');
        if (f.size() != 5) throw IoError("bad CSV row in " + path.string());
        EvalRecord r;
        for (const auto& kstr : split(f[0], ';'))
            r.ktuple.ks.push_back(static_cast<int>(parse_long(kstr, path)));
        r.al = parse_double(f[1], path);
        r.al_source = al_source_from_name(f[2]);
        r.cr = parse_double(f[3], path);
        r.per_layer_inertia = {parse_double(f[4], path)}; // sum only survives CSV
        records.push_back(std::move(r));
    }
    return records;
}

void save_front_csv(const ParetoFront& front, const fs::path& path) {
    save_results_csv(front.points, path);
}

void save_candidates_json(const std::vector<CandidateSet>& sets, const fs::path& path) {
    json j;
    j["schema_version"] = kSchemaVersion;
    json detail = json::array();
    for (const auto& cs : sets) {
        json ks = json::array();
        json rows = json::array();
        for (const auto& c : cs.candidates) {
            ks.push_back(c.k);
            rows.push_back({{"k", c.k}, {"al_pp", c.al}, {"cr", c.cr}, {"b_index", c.b_index}});
        }
        j["layer" + std::to_string(cs.layer)] = ks;
        detail.push_back({{"layer", cs.layer}, {"candidates", rows}});
    }
    j["detail"] = detail;
    write_file(path, j.dump(2) + "\n");
}

std::vector<CandidateSet> load_candidates_json(const fs::path& path) {
    const json j = parse_json_file(path);
    check_schema(j, path);
    if (!j.contains("detail")) throw IoError("missing candidate detail in " + path.string());
    std::vector<CandidateSet> sets;
    for (const auto& d : j["detail"]) {
        CandidateSet cs;
        cs.layer = d.at("layer").get<int>();
        for (const auto& row : d.at("candidates")) {
            Candidate c;
            c.k = row.at("k").get<int>();
            c.al = row.at("al_pp").get<double>();
            c.cr = row.at("cr").get<double>();
            c.b_index = row.at("b_index").get<int>();
            cs.candidates.push_back(c);
        }
        sets.push_back(std::move(cs));
    }
    return sets;
}

void save_predictor_json(const PredictionModel& model, const fs::path& path) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["alphas"] = model.alphas;
    j["intercept"] = model.intercept ? json(*model.intercept) : json(nullptr);
    j["n_samples"] = model.fit_diagnostics.num_samples;
    j["rmse_train"] = model.fit_diagnostics.rmse_train;
    j["mae_train"] = model.fit_diagnostics.mae_train;
    write_file(path, j.dump(2) + "\n");
}

PredictionModel load_predictor_json(const fs::path& path) {
    const json j = parse_json_file(path);
    check_schema(j, path);
    PredictionModel m;
    m.alphas = j.at("alphas").get<std::vector<double>>();
    if (!j.at("intercept").is_null()) m.intercept = j["intercept"].get<double>();
    m.fit_diagnostics.num_samples = j.value("n_samples", std::size_t{0});
    m.fit_diagnostics.rmse_train = j.value("rmse_train", 0.0);
    m.fit_diagnostics.mae_train = j.value("mae_train", 0.0);
    return m;
}

void save_baseline_json(double accuracy, std::size_t n_samples, const fs::path& path) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["accuracy"] = accuracy;
    j["n_samples"] = n_samples;
    write_file(path, j.dump(2) + "\n");
}

double load_baseline_json(const fs::path& path) {
    const json j = parse_json_file(path);
    check_schema(j, path);
    return j.at("accuracy").get<double>();
}

void save_comparison_json(const FrontComparison& cmp, const fs::path& path) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["coverage"] = {{"fraction", cmp.coverage}, {"eps_al", cmp.eps_al}, {"eps_cr", cmp.eps_cr}};
    j["gap"] = {{"mean", cmp.mean_gap}, {"max", cmp.max_gap}};
    j["hypervolume"] = {{"truth", cmp.hypervolume_truth},
                        {"predicted", cmp.hypervolume_predicted},
                        {"ratio", cmp.hypervolume_ratio}};
    write_file(path, j.dump(2) + "\n");
}

} // namespace wsdse::io
