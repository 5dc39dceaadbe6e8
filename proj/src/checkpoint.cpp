#include <fstream>
#include <string>

#include "brs/autoencoder.hpp"
#include "brs/bitio.hpp"

namespace brs {

namespace {

constexpr char kMagic[4] = {'B', 'R', 'A', 'E'};
constexpr std::uint8_t kVersion = 1;

void put_tensor(std::vector<std::uint8_t>& out, const Tensor& t) {
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (int i = 0; i < t.rank(); ++i) put_u32(out, static_cast<std::uint32_t>(t.dim(i)));
    for (std::int64_t i = 0; i < t.numel(); ++i) put_f64(out, t[i]);
}

Tensor read_tensor(ByteReader& reader) {
    const std::uint32_t rank = reader.u32();
    if (rank > 4) throw IntegrityError("checkpoint: tensor rank out of range");
    std::vector<int> shape;
    std::int64_t n = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
        const std::uint32_t d = reader.u32();
        if (d > (1u << 24)) throw IntegrityError("checkpoint: dimension out of range");
        shape.push_back(static_cast<int>(d));
        n *= d;
    }
    std::vector<double> data(static_cast<std::size_t>(n));
    for (auto& v : data) v = reader.f64();
    return Tensor(std::move(shape), std::move(data));
}

void put_conv(std::vector<std::uint8_t>& out, const ConvLayerParams& conv) {
    put_u32(out, static_cast<std::uint32_t>(conv.stride));
    put_u32(out, static_cast<std::uint32_t>(conv.padding));
    put_tensor(out, conv.weights);
    put_tensor(out, conv.bias);
}

ConvLayerParams read_conv(ByteReader& reader) {
    ConvLayerParams conv;
    conv.stride = static_cast<int>(reader.u32());
    conv.padding = static_cast<int>(reader.u32());
    conv.weights = read_tensor(reader);
    conv.bias = read_tensor(reader);
    if (conv.weights.rank() != 4 || conv.bias.rank() != 1 ||
        conv.bias.dim(0) != conv.weights.dim(0)) {
        throw IntegrityError("checkpoint: malformed conv layer");
    }
    return conv;
}

void put_bn(std::vector<std::uint8_t>& out, const BatchNormParams& bn) {
    put_f64(out, bn.momentum);
    put_f64(out, bn.epsilon);
    put_tensor(out, bn.gamma);
    put_tensor(out, bn.beta);
    put_tensor(out, bn.running_mean);
    put_tensor(out, bn.running_var);
}

BatchNormParams read_bn(ByteReader& reader) {
    BatchNormParams bn;
    bn.momentum = reader.f64();
    bn.epsilon = reader.f64();
    bn.gamma = read_tensor(reader);
    bn.beta = read_tensor(reader);
    bn.running_mean = read_tensor(reader);
    bn.running_var = read_tensor(reader);
    if (!bn.gamma.same_shape(bn.beta) || !bn.gamma.same_shape(bn.running_mean) ||
        !bn.gamma.same_shape(bn.running_var)) {
        throw IntegrityError("checkpoint: malformed batchnorm block");
    }
    return bn;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const ModelParams& params) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u8(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(params.config.layers));
    put_u32(out, static_cast<std::uint32_t>(params.config.channels));
    put_u32(out, static_cast<std::uint32_t>(params.config.input_channels));
    put_string(out, std::string(binarizer_name(params.config.binarizer)));
    put_f64(out, params.config.gumbel.tau);
    put_f64(out, params.config.gumbel.tau_initial);
    put_f64(out, params.config.gumbel.anneal_factor);
    put_f64(out, params.config.gumbel.tau_floor);
    for (const auto& layer : params.encoder) {
        put_conv(out, layer.conv);
        put_bn(out, layer.bn);
    }
    for (const auto& layer : params.decoder) {
        put_conv(out, layer.conv);
        put_bn(out, layer.bn);
    }
    put_conv(out, params.output_proj);
    return out;
}

ModelParams deserialize_model(std::span<const std::uint8_t> bytes) {
    ByteReader reader(bytes);
    auto magic = reader.take(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic)) {
        throw IntegrityError("checkpoint: bad magic (expected BRAE)");
    }
    if (reader.u8() != kVersion) throw IntegrityError("checkpoint: unsupported version");
    ModelParams params;
    params.config.layers = static_cast<int>(reader.u32());
    params.config.channels = static_cast<int>(reader.u32());
    params.config.input_channels = static_cast<int>(reader.u32());
    params.config.binarizer = binarizer_from_name(reader.string());
    params.config.gumbel.tau = reader.f64();
    params.config.gumbel.tau_initial = reader.f64();
    params.config.gumbel.anneal_factor = reader.f64();
    params.config.gumbel.tau_floor = reader.f64();
    params.config.validate();
    for (int l = 0; l < params.config.layers; ++l) {
        EncDecLayer layer;
        layer.conv = read_conv(reader);
        layer.bn = read_bn(reader);
        params.encoder.push_back(std::move(layer));
    }
    for (int l = 0; l < params.config.layers; ++l) {
        EncDecLayer layer;
        layer.conv = read_conv(reader);
        layer.bn = read_bn(reader);
        params.decoder.push_back(std::move(layer));
    }
    params.output_proj = read_conv(reader);
    if (!reader.done()) throw IntegrityError("checkpoint: trailing bytes");
    return params;
}

void save_checkpoint(const std::string& path, const ModelParams& params) {
    const std::vector<std::uint8_t> bytes = serialize_model(params);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open checkpoint file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to checkpoint file: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

std::uint64_t model_fingerprint(const ModelParams& params) {
    return fnv1a64(serialize_model(params));
}

}  // namespace brs
