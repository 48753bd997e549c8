#include "mnav/session.hpp"

#include <cstring>
#include <fstream>

#include "config_io.hpp"

namespace mnav {

using nlohmann::json;

namespace {

constexpr char kMagic[] = "MNAVSES";

struct BlobWriter {
    std::vector<char> data;
    json index = json::array();

    int add(const void* src, size_t bytes) {
        const int id = static_cast<int>(index.size());
        index.push_back({{"offset", data.size()}, {"bytes", bytes}});
        const char* p = static_cast<const char*>(src);
        data.insert(data.end(), p, p + bytes);
        return id;
    }
    int add_i32(const std::vector<int32_t>& v) { return add(v.data(), v.size() * 4); }
    int add_f64(const std::vector<double>& v) { return add(v.data(), v.size() * 8); }
    int add_u8(const std::vector<uint8_t>& v) { return add(v.data(), v.size()); }
};

struct BlobReader {
    const std::vector<char>* data;
    const json* index;

    std::pair<const char*, size_t> at(int id) const {
        if (id < 0 || id >= static_cast<int>(index->size()))
            throw ParseError("session: blob index " + std::to_string(id) + " out of range");
        const auto& e = (*index)[id];
        const size_t off = e.at("offset").get<size_t>();
        const size_t bytes = e.at("bytes").get<size_t>();
        if (off + bytes > data->size())
            throw ParseError("session: truncated archive at byte offset " +
                             std::to_string(off + bytes));
        return {data->data() + off, bytes};
    }
    std::vector<int32_t> read_i32(int id) const {
        auto [p, bytes] = at(id);
        std::vector<int32_t> v(bytes / 4);
        std::memcpy(v.data(), p, bytes);
        return v;
    }
    std::vector<double> read_f64(int id) const {
        auto [p, bytes] = at(id);
        std::vector<double> v(bytes / 8);
        std::memcpy(v.data(), p, bytes);
        return v;
    }
    std::vector<uint8_t> read_u8(int id) const {
        auto [p, bytes] = at(id);
        return std::vector<uint8_t>(p, p + bytes);
    }
};

json bbox_json(const BBox& b) { return {b.lo.x, b.lo.y, b.hi.x, b.hi.y}; }
BBox bbox_from(const json& j) { return {{j.at(0), j.at(1)}, {j.at(2), j.at(3)}}; }

}  // namespace

void Session::check_consistency() const {
    auto room_exists = [&](int id) { return rooms.find(id) != nullptr; };
    for (const EntryPoint& ep : eps.points) {
        if (!room_exists(ep.room_a))
            throw DomainError("session: entry point " + std::to_string(ep.id) +
                              " references missing room " + std::to_string(ep.room_a));
        if (!room_exists(ep.room_b))
            throw DomainError("session: entry point " + std::to_string(ep.id) +
                              " references missing room " + std::to_string(ep.room_b));
    }
    for (const GraphNode& n : graph.nodes) {
        if (!room_exists(n.room))
            throw DomainError("session: graph node " + std::to_string(n.id) +
                              " references missing room " + std::to_string(n.room));
        if (!eps.find(n.entry_point))
            throw DomainError("session: graph node " + std::to_string(n.id) +
                              " references missing entry point " + std::to_string(n.entry_point));
    }
    for (const GraphEdge& e : graph.edges) {
        if (!graph.find(e.u) || !graph.find(e.v))
            throw DomainError("session: edge references a missing node");
    }
    for (const NetworkEntry& e : registry.entries)
        for (int rid : e.room_ids)
            if (!room_exists(rid))
                throw DomainError("session: network " + std::to_string(e.net->id()) +
                                  " references missing room " + std::to_string(rid));
    if (rooms.lattice.width != occupancy.lattice.width ||
        rooms.lattice.height != occupancy.lattice.height)
        throw DomainError("session: room set lattice does not match the occupancy map");
}

void save_session(const Session& s, const std::string& path) {
    s.check_consistency();
    BlobWriter blobs;
    json m;
    m["format_version"] = Session::kFormatVersion;
    m["configs"] = {{"sampler", config_io::to_json(s.sampler)},
                    {"train", config_io::to_json(s.train)},
                    {"net", config_io::to_json(s.net_config)},
                    {"segmenter", config_io::to_json(s.segmenter)},
                    {"explorer", config_io::to_json(s.explorer)},
                    {"nav", config_io::to_json(s.nav)},
                    {"planner", config_io::to_json(s.planner)}};
    m["lattice"] = {{"width", s.occupancy.lattice.width},
                    {"height", s.occupancy.lattice.height},
                    {"resolution", s.occupancy.lattice.resolution}};
    m["map_version"] = s.occupancy.version;
    m["complete"] = s.complete;
    m["frames"] = s.frames;
    m["occupancy_blob"] = blobs.add_u8(s.occupancy.cells);

    json rooms = json::array();
    for (const Room& r : s.rooms.rooms)
        rooms.push_back({{"id", r.id},
                         {"confirmed", r.confirmed},
                         {"bbox", bbox_json(r.bbox)},
                         {"cells_blob", blobs.add_i32(std::vector<int32_t>(r.cells.begin(), r.cells.end()))}});
    m["rooms"] = {{"next_id", s.rooms.next_room_id},
                  {"map_version", s.rooms.map_version},
                  {"list", rooms},
                  {"label_blob", blobs.add_i32(s.rooms.label_grid)},
                  {"watershed_blob", blobs.add_i32(s.rooms.watershed)}};

    json eps = json::array();
    for (const EntryPoint& p : s.eps.points)
        eps.push_back({{"id", p.id}, {"x", p.position.x}, {"y", p.position.y},
                       {"room_a", p.room_a}, {"room_b", p.room_b}});
    m["entry_points"] = {{"next_id", s.eps.next_ep_id},
                         {"list", eps},
                         {"doorway_blob", blobs.add_i32(s.eps.doorway_grid)}};

    json nodes = json::array();
    for (const GraphNode& n : s.graph.nodes)
        nodes.push_back({{"id", n.id}, {"entry_point", n.entry_point}, {"room", n.room},
                         {"x", n.position.x}, {"y", n.position.y}});
    json edges = json::array();
    for (const GraphEdge& e : s.graph.edges)
        edges.push_back({{"u", e.u}, {"v", e.v}, {"weight", e.weight},
                         {"kind", e.kind == EdgeKind::Doorway ? "doorway" : "intraroom"}});
    json node_ids = json::array();
    for (const auto& [key, id] : s.graph.node_ids)
        node_ids.push_back({key.first, key.second, id});
    m["graph"] = {{"version", s.graph.version}, {"next_node_id", s.graph.next_node_id},
                  {"nodes", nodes}, {"edges", edges}, {"node_ids", node_ids}};

    json nets = json::array();
    for (const NetworkEntry& e : s.registry.entries)
        nets.push_back({{"id", e.net->id()},
                        {"rooms", e.room_ids},
                        {"bbox", bbox_json(e.net->bbox())},
                        {"train_steps", e.net->train_steps()},
                        {"steps_at_all_confirmed", e.steps_at_all_confirmed},
                        {"last_assign_frame", e.last_assign_frame},
                        {"fourier_blob", blobs.add_f64(e.net->fourier_matrix())},
                        {"params_blob", blobs.add_f64(e.net->parameters())}});
    m["registry"] = {{"next_id", s.registry.next_net_id},
                     {"d_max", s.registry.d_max},
                     {"net_config", config_io::to_json(s.registry.net_config)},
                     {"entries", nets}};
    m["blobs"] = blobs.index;

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("session: cannot open " + path + " for writing");
    out << kMagic << Session::kFormatVersion << '\n';
    out << m.dump() << '\n';
    out.write(blobs.data.data(), static_cast<std::streamsize>(blobs.data.size()));
    if (!out) throw Error("session: write failed for " + path);
}

Session load_session(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("session: cannot open " + path);
    std::string header;
    std::getline(in, header);
    const std::string expected = std::string(kMagic) + std::to_string(Session::kFormatVersion);
    if (header.rfind(kMagic, 0) != 0)
        throw ParseError("session: not a session archive (bad magic)");
    if (header != expected)
        throw ParseError("session: unsupported format version '" + header +
                         "', this build reads " + expected);
    std::string manifest_line;
    std::getline(in, manifest_line);
    json m;
    try {
        m = json::parse(manifest_line);
    } catch (const json::exception& e) {
        throw ParseError(std::string("session: manifest parse failure: ") + e.what());
    }
    std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const json index = m.at("blobs");
    BlobReader blobs{&data, &index};

    Session s;
    try {
        const json& cfgs = m.at("configs");
        s.sampler = config_io::sampler_from_json(cfgs.at("sampler"));
        s.train = config_io::train_from_json(cfgs.at("train"));
        s.net_config = config_io::net_from_json(cfgs.at("net"));
        s.segmenter = config_io::segmenter_from_json(cfgs.at("segmenter"));
        s.explorer = config_io::explorer_from_json(cfgs.at("explorer"));
        s.nav = config_io::nav_from_json(cfgs.at("nav"));
        s.planner = config_io::planner_from_json(cfgs.at("planner"));

        Lattice lat{m.at("lattice").at("width"), m.at("lattice").at("height"),
                    m.at("lattice").at("resolution")};
        s.occupancy.lattice = lat;
        s.occupancy.version = m.at("map_version");
        s.occupancy.cells = blobs.read_u8(m.at("occupancy_blob"));
        if (s.occupancy.cells.size() != static_cast<size_t>(lat.width) * lat.height)
            throw ParseError("session: occupancy blob size mismatch");
        s.complete = m.at("complete");
        s.frames = m.at("frames");

        const json& rj = m.at("rooms");
        s.rooms.lattice = lat;
        s.rooms.next_room_id = rj.at("next_id");
        s.rooms.map_version = rj.at("map_version");
        s.rooms.label_grid = blobs.read_i32(rj.at("label_blob"));
        s.rooms.watershed = blobs.read_i32(rj.at("watershed_blob"));
        for (const json& r : rj.at("list")) {
            Room room;
            room.id = r.at("id");
            room.confirmed = r.at("confirmed");
            room.bbox = bbox_from(r.at("bbox"));
            {
                const auto cells32 = blobs.read_i32(r.at("cells_blob"));
                room.cells.assign(cells32.begin(), cells32.end());
            }
            s.rooms.rooms.push_back(std::move(room));
        }

        const json& ej = m.at("entry_points");
        s.eps.next_ep_id = ej.at("next_id");
        s.eps.doorway_grid = blobs.read_i32(ej.at("doorway_blob"));
        for (const json& p : ej.at("list"))
            s.eps.points.push_back(
                {p.at("id"), {p.at("x"), p.at("y")}, p.at("room_a"), p.at("room_b")});

        const json& gj = m.at("graph");
        s.graph.version = gj.at("version");
        s.graph.next_node_id = gj.at("next_node_id");
        for (const json& n : gj.at("nodes"))
            s.graph.nodes.push_back(
                {n.at("id"), n.at("entry_point"), n.at("room"), {n.at("x"), n.at("y")}});
        for (const json& e : gj.at("edges"))
            s.graph.edges.push_back({e.at("u"), e.at("v"), e.at("weight"),
                                     e.at("kind") == "doorway" ? EdgeKind::Doorway
                                                               : EdgeKind::IntraRoom});
        for (const json& k : gj.at("node_ids"))
            s.graph.node_ids[{k.at(0), k.at(1)}] = k.at(2);

        const json& nj = m.at("registry");
        s.registry.next_net_id = nj.at("next_id");
        s.registry.d_max = nj.at("d_max");
        s.registry.net_config = config_io::net_from_json(nj.at("net_config"));
        for (const json& e : nj.at("entries")) {
            NetworkEntry entry;
            entry.net = std::make_unique<Subnetwork>(e.at("id").get<int>(), s.registry.net_config,
                                                     bbox_from(e.at("bbox")), s.registry.d_max);
            entry.net->restore(blobs.read_f64(e.at("fourier_blob")),
                               blobs.read_f64(e.at("params_blob")),
                               e.at("train_steps").get<uint64_t>());
            entry.room_ids = e.at("rooms").get<std::vector<int>>();
            entry.steps_at_all_confirmed = e.at("steps_at_all_confirmed");
            entry.last_assign_frame = e.at("last_assign_frame");
            s.registry.entries.push_back(std::move(entry));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("session: malformed manifest: ") + e.what());
    }
    s.check_consistency();
    return s;
}

}  // namespace mnav
