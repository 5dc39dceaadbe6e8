#include "brs/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "brs/dataset.hpp"

namespace brs {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse number '" + value + "'");
    }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse integer '" + value + "'");
    }
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);

    RunConfig cfg;
    std::string line;
    int lineno = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto space = t.find_first_of(" \t");
        const std::string key = space == std::string::npos ? t : t.substr(0, space);
        const std::string value = space == std::string::npos ? "" : trim(t.substr(space + 1));
        const auto where = path + ":" + std::to_string(lineno);
        if (value.empty()) throw ConfigError(where + ": key '" + key + "' has no value");

        if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
        else if (key == "layers") cfg.layers = static_cast<int>(parse_int(key, value));
        else if (key == "channels") cfg.channels = static_cast<int>(parse_int(key, value));
        else if (key == "input_channels") cfg.input_channels = static_cast<int>(parse_int(key, value));
        else if (key == "binarizer") cfg.binarizer = value;
        else if (key == "gumbel_tau_initial") cfg.gumbel_tau_initial = parse_double(key, value);
        else if (key == "gumbel_anneal_factor") cfg.gumbel_anneal_factor = parse_double(key, value);
        else if (key == "gumbel_tau_floor") cfg.gumbel_tau_floor = parse_double(key, value);
        else if (key == "lr") cfg.lr = parse_double(key, value);
        else if (key == "lr_halving_period_epochs")
            cfg.lr_halving_period_epochs = static_cast<int>(parse_int(key, value));
        else if (key == "beta1") cfg.beta1 = parse_double(key, value);
        else if (key == "beta2") cfg.beta2 = parse_double(key, value);
        else if (key == "batch_size") cfg.batch_size = static_cast<int>(parse_int(key, value));
        else if (key == "epochs") cfg.epochs = static_cast<int>(parse_int(key, value));
        else if (key == "codec") cfg.codec = value;
        else if (key == "quality") cfg.quality = parse_double(key, value);
        else if (key == "external_encode_cmd") cfg.external_encode_cmd = value;
        else if (key == "external_decode_cmd") cfg.external_decode_cmd = value;
        else if (key == "raw_format") cfg.raw_format = value;
        else if (key == "budget_mbps") cfg.budget_mbps = parse_double(key, value);
        else if (key == "split") cfg.split = parse_double(key, value);
        else if (key == "group_bits") cfg.group_bits = static_cast<int>(parse_int(key, value));
        else if (key == "manifest") cfg.manifest = value;
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "checkpoint") cfg.checkpoint = value;
        else if (key == "container") cfg.container = value;
        else if (key == "cache_dir") cfg.cache_dir = value;
        else if (key == "holdout") cfg.holdout = static_cast<int>(parse_int(key, value));
        else if (key == "rate_point") {
            std::istringstream is(value);
            RatePoint rp;
            if (!(is >> rp.mbps >> rp.split >> rp.checkpoint)) {
                throw ConfigError(where + ": rate_point needs '<mbps> <split> <checkpoint>'");
            }
            cfg.rate_points.push_back(std::move(rp));
        } else {
            throw ConfigError(where + ": unknown config key '" + key + "'");
        }
        seen.insert(key);
    }
    return cfg;
}

std::string RunConfig::resolved_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "# resolved configuration; re-running any command against this file\n"
          "# reproduces the outputs bit for bit\n";
    os << "seed " << seed << "\n";
    os << "layers " << layers << "\n";
    os << "channels " << channels << "\n";
    os << "input_channels " << input_channels << "\n";
    os << "binarizer " << binarizer << "\n";
    os << "gumbel_tau_initial " << gumbel_tau_initial << "\n";
    os << "gumbel_anneal_factor " << gumbel_anneal_factor << "\n";
    os << "gumbel_tau_floor " << gumbel_tau_floor << "\n";
    os << "lr " << lr << "\n";
    os << "lr_halving_period_epochs " << lr_halving_period_epochs << "\n";
    os << "beta1 " << beta1 << "\n";
    os << "beta2 " << beta2 << "\n";
    os << "batch_size " << batch_size << "\n";
    os << "epochs " << epochs << "\n";
    os << "codec " << codec << "\n";
    os << "quality " << quality << "\n";
    if (!external_encode_cmd.empty()) os << "external_encode_cmd " << external_encode_cmd << "\n";
    if (!external_decode_cmd.empty()) os << "external_decode_cmd " << external_decode_cmd << "\n";
    os << "raw_format " << raw_format << "\n";
    os << "budget_mbps " << budget_mbps << "\n";
    os << "split " << split << "\n";
    os << "group_bits " << group_bits << "\n";
    if (!manifest.empty()) os << "manifest " << manifest << "\n";
    os << "out_dir " << out_dir << "\n";
    if (!checkpoint.empty()) os << "checkpoint " << checkpoint << "\n";
    if (!container.empty()) os << "container " << container << "\n";
    os << "cache_dir " << effective_cache_dir() << "\n";
    os << "holdout " << holdout << "\n";
    for (const auto& rp : rate_points) {
        os << "rate_point " << rp.mbps << " " << rp.split << " " << rp.checkpoint << "\n";
    }
    return os.str();
}

AutoencoderConfig RunConfig::autoencoder_config() const {
    AutoencoderConfig a;
    a.layers = layers;
    a.channels = channels;
    a.input_channels = input_channels;
    a.binarizer = binarizer_from_name(binarizer);
    a.gumbel.tau = gumbel_tau_initial;
    a.gumbel.tau_initial = gumbel_tau_initial;
    a.gumbel.anneal_factor = gumbel_anneal_factor;
    a.gumbel.tau_floor = gumbel_tau_floor;
    a.validate();
    return a;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig t;
    t.lr = lr;
    t.lr_halving_period_epochs = lr_halving_period_epochs;
    t.beta1 = beta1;
    t.beta2 = beta2;
    t.batch_size = batch_size;
    t.epochs = epochs;
    t.seed = seed;
    return t;
}

BaseCodecKind RunConfig::codec_kind() const {
    BaseCodecKind k;
    if (codec == "toy") {
        k.variant = CodecVariant::toy_dct;
    } else if (codec == "external") {
        k.variant = CodecVariant::external;
        if (external_encode_cmd.empty() || external_decode_cmd.empty()) {
            throw ConfigError("codec external needs external_encode_cmd and external_decode_cmd");
        }
    } else {
        throw ConfigError("unknown codec '" + codec + "' (expected toy|external)");
    }
    k.quality = quality;
    k.target_bitrate = split * budget_mbps * 1e6;
    k.encode_command = external_encode_cmd;
    k.decode_command = external_decode_cmd;
    k.raw_format = raw_format;
    return k;
}

std::string RunConfig::effective_cache_dir() const {
    return cache_dir.empty() ? default_cache_dir() : cache_dir;
}

}  // namespace brs
