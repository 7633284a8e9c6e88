#include "pimorch/arch.hpp"

#include "json_util.hpp"
#include "pimorch/errors.hpp"

namespace pimorch {

using detail::json;

namespace {

constexpr std::string_view kWhere = "arch";
constexpr double kMiB = 1024.0 * 1024.0;

void fail(const std::string& msg) { throw ValidationError("arch: " + msg); }

}  // namespace

void validate(const ArchSpec& a) {
    if (a.grid_h < 1 || a.grid_w < 1) fail("grid_h and grid_w must be >= 1");
    if (a.pe_size < 1) fail("pe_size must be >= 1");
    if (a.node_cap <= 0) fail("node_cap must be > 0");
    if (!(a.local_bw > 0) || !(a.link_bw > 0)) fail("bandwidths must be > 0");
    if (a.flit_bits < 8 || a.flit_bits % 8 != 0) fail("flit_bits must be a positive multiple of 8");
    if (!(a.clock_mhz > 0)) fail("clock_mhz must be > 0");
    if (a.e_noc < 0 || a.e_mem < 0 || a.e_mac < 0) fail("energy constants must be >= 0");
    if (a.acu.softmax_row < 0 || a.acu.layernorm_row < 0 || a.acu.gelu_elem < 0) {
        fail("acu latencies must be >= 0");
    }
    if (a.p_min < 1) fail("p_min must be >= 1");
}

ArchSpec load_arch(std::string_view config_text) {
    json doc = detail::parse_document(config_text, kWhere);
    if (!doc.is_object()) throw ParseError("arch: document must be an object");
    detail::reject_unknown_keys(doc,
                                {"schema_version", "name", "grid_h", "grid_w", "pe_size",
                                 "node_cap_bytes", "node_cap_mib", "local_bw_bits", "flit_bits",
                                 "clock_mhz", "e_noc_pj_per_bit_hop", "e_mem_pj_per_bit",
                                 "e_mac_pj", "acu_latency", "p_min"},
                                kWhere);
    detail::check_schema_version(doc, ArchSpec::kSchemaVersion, kWhere);

    ArchSpec a;
    a.name = detail::get<std::string>(doc, "name", kWhere);
    a.grid_h = detail::get<int>(doc, "grid_h", kWhere);
    a.grid_w = detail::get<int>(doc, "grid_w", kWhere);
    a.pe_size = detail::get<int>(doc, "pe_size", kWhere);

    const bool has_bytes = doc.contains("node_cap_bytes");
    const bool has_mib = doc.contains("node_cap_mib");
    if (has_bytes == has_mib) fail("exactly one of node_cap_bytes / node_cap_mib is required");
    if (has_bytes) {
        a.node_cap = detail::get<std::int64_t>(doc, "node_cap_bytes", kWhere);
    } else {
        a.node_cap = static_cast<std::int64_t>(detail::get<double>(doc, "node_cap_mib", kWhere) * kMiB);
    }

    a.local_bw = detail::get<double>(doc, "local_bw_bits", kWhere) / 8.0;
    a.flit_bits = detail::get<int>(doc, "flit_bits", kWhere);
    a.link_bw = a.flit_bits / 8.0;
    a.clock_mhz = detail::get<double>(doc, "clock_mhz", kWhere);
    a.e_noc = detail::get<double>(doc, "e_noc_pj_per_bit_hop", kWhere);
    a.e_mem = detail::get<double>(doc, "e_mem_pj_per_bit", kWhere);
    a.e_mac = detail::get_or<double>(doc, "e_mac_pj", 0.2, kWhere);

    if (auto it = doc.find("acu_latency"); it != doc.end()) {
        if (!it->is_object()) fail("'acu_latency' must be an object");
        detail::reject_unknown_keys(*it, {"softmax_row", "layernorm_row", "gelu_elem"},
                                    "arch.acu_latency");
        a.acu.softmax_row = detail::get_or<double>(*it, "softmax_row", a.acu.softmax_row, kWhere);
        a.acu.layernorm_row = detail::get_or<double>(*it, "layernorm_row", a.acu.layernorm_row, kWhere);
        a.acu.gelu_elem = detail::get_or<double>(*it, "gelu_elem", a.acu.gelu_elem, kWhere);
    }
    a.p_min = detail::get_or<int>(doc, "p_min", a.pe_size, kWhere);
    validate(a);
    return a;
}

ArchSpec load_arch_file(const std::string& path) { return load_arch(detail::read_file(path)); }

std::string dump_arch(const ArchSpec& a) {
    json doc = json::object();
    doc["schema_version"] = ArchSpec::kSchemaVersion;
    doc["name"] = a.name;
    doc["grid_h"] = a.grid_h;
    doc["grid_w"] = a.grid_w;
    doc["pe_size"] = a.pe_size;
    doc["node_cap_bytes"] = a.node_cap;
    doc["local_bw_bits"] = a.local_bw * 8.0;
    doc["flit_bits"] = a.flit_bits;
    doc["clock_mhz"] = a.clock_mhz;
    doc["e_noc_pj_per_bit_hop"] = a.e_noc;
    doc["e_mem_pj_per_bit"] = a.e_mem;
    doc["e_mac_pj"] = a.e_mac;
    doc["acu_latency"] = {{"softmax_row", a.acu.softmax_row},
                          {"layernorm_row", a.acu.layernorm_row},
                          {"gelu_elem", a.acu.gelu_elem}};
    doc["p_min"] = a.p_min;
    return doc.dump(2) + "\n";
}

}  // namespace pimorch
