#include "hetmap/platform.hpp"

#include <algorithm>
#include <set>

namespace hetmap {

const ProcUnit* Platform::find_proc(const std::string& id) const {
    for (const ProcUnit& p : procs)
        if (p.id == id) return &p;
    return nullptr;
}

const MemoryUnit* Platform::find_mem(const std::string& id) const {
    for (const MemoryUnit& m : memories)
        if (m.id == id) return &m;
    return nullptr;
}

bool Platform::has_unit(const std::string& id) const {
    return find_proc(id) != nullptr || find_mem(id) != nullptr;
}

const std::vector<std::string>* Platform::assoc_of(
    const std::string& proc_id) const {
    for (const auto& [p, mems] : assoc)
        if (p == proc_id) return &mems;
    return nullptr;
}

std::optional<double> Platform::link_limit(const std::string& a,
                                           const std::string& b) const {
    if (a == b) return kInf;
    for (const Link& l : links)
        if ((l.a == a && l.b == b) || (l.a == b && l.b == a))
            return l.rate_limit;
    return std::nullopt;
}

std::vector<std::string> Platform::unit_ids() const {
    std::vector<std::string> out;
    out.reserve(procs.size() + memories.size());
    for (const ProcUnit& p : procs) out.push_back(p.id);
    for (const MemoryUnit& m : memories) out.push_back(m.id);
    return out;
}

double memory_rate(const MemoryUnit& mem) {
    if (mem.is_virtual)
        throw error("virtual memories have no finite rate: " + mem.id);
    if (mem.explicit_rate > 0.0) return mem.explicit_rate;
    return mem.bus_clock * mem.bus_width * mem.channels;
}

std::pair<double, double> proc_rates(const ProcUnit& dev) {
    return {dev.clock * dev.overhead_penalty, dev.cores * dev.data_parallelism};
}

namespace {

void link_all_memories(Platform& pf) {
    pf.links.clear();
    for (size_t i = 0; i < pf.memories.size(); ++i)
        for (size_t j = i + 1; j < pf.memories.size(); ++j)
            pf.links.push_back({pf.memories[i].id, pf.memories[j].id, kInf});
}

void add_cpu_gpu(Platform& pf) {
    ProcUnit cpu;
    cpu.id = "cpu";
    cpu.clock = 2.4e9;
    cpu.cores = 32;
    cpu.data_parallelism = 8;
    pf.procs.push_back(cpu);
    MemoryUnit cpu_ram;
    cpu_ram.id = "cpu_ram";
    cpu_ram.explicit_rate = 170e9;
    pf.memories.push_back(cpu_ram);
    pf.assoc.push_back({"cpu", {"cpu_ram"}});

    ProcUnit gpu;
    gpu.id = "gpu";
    gpu.clock = 1.6e9;
    gpu.cores = 3584;
    gpu.data_parallelism = 1;
    pf.procs.push_back(gpu);
    MemoryUnit gpu_ram;
    gpu_ram.id = "gpu_ram";
    gpu_ram.explicit_rate = 410e9;
    pf.memories.push_back(gpu_ram);
    pf.assoc.push_back({"gpu", {"gpu_ram"}});
}

void add_fpga(Platform& pf, const std::string& name) {
    ProcUnit fpga;
    fpga.id = name;
    fpga.clock = 0.4e9;
    fpga.cores = 1;
    fpga.data_parallelism = 1;
    fpga.dataflow = true;
    fpga.area_capacity = 28;
    pf.procs.push_back(fpga);
    MemoryUnit ram;
    ram.id = name + "_ram";
    ram.explicit_rate = 11e9;
    pf.memories.push_back(ram);
    pf.assoc.push_back({name, {name + "_ram"}});
}

} // namespace

Platform preset(const std::string& name) {
    Platform pf;
    if (name == "CG") {
        add_cpu_gpu(pf);
    } else if (name == "CGF") {
        add_cpu_gpu(pf);
        add_fpga(pf, "fpga");
    } else if (name == "CGFF") {
        add_cpu_gpu(pf);
        add_fpga(pf, "fpga");
        add_fpga(pf, "fpga2");
    } else {
        throw error("unknown preset: " + name);
    }
    link_all_memories(pf);
    return pf;
}

std::string add_virtual_memory(Platform& pf, const std::string& owner) {
    if (!pf.find_proc(owner)) throw error("unknown proc unit: " + owner);
    int n = 0;
    for (const MemoryUnit& m : pf.memories)
        if (m.is_virtual && m.owner == owner) ++n;
    MemoryUnit vm;
    vm.id = owner + "_vmem" + (n ? std::to_string(n) : "");
    while (pf.has_unit(vm.id)) vm.id += "_";
    vm.is_virtual = true;
    vm.owner = owner;
    pf.memories.push_back(vm);
    for (auto& [p, mems] : pf.assoc)
        if (p == owner) mems.push_back(vm.id);
    return vm.id;
}

std::vector<std::string> validate_platform(const Platform& pf) {
    std::vector<std::string> out;
    std::set<std::string> ids;
    for (const ProcUnit& p : pf.procs) {
        if (!ids.insert(p.id).second) out.push_back("duplicate unit id: " + p.id);
        if (!(p.clock * p.overhead_penalty > 0.0))
            out.push_back("proc " + p.id + " has non-positive serial rate");
        if (p.cores * p.data_parallelism < 1.0)
            out.push_back("proc " + p.id + " has parallel factor < 1");
    }
    for (const MemoryUnit& m : pf.memories) {
        if (!ids.insert(m.id).second) out.push_back("duplicate unit id: " + m.id);
        if (m.is_virtual) {
            if (m.owner.empty() || !pf.find_proc(m.owner))
                out.push_back("virtual memory " + m.id + " has no valid owner");
        } else if (!(memory_rate(m) > 0.0)) {
            out.push_back("memory " + m.id + " has non-positive rate");
        }
    }
    for (const ProcUnit& p : pf.procs) {
        const auto* mems = pf.assoc_of(p.id);
        if (!mems || mems->empty()) {
            out.push_back("proc " + p.id + " has no associated memory");
            continue;
        }
        for (const std::string& m : *mems)
            if (!pf.find_mem(m))
                out.push_back("proc " + p.id + " associated with unknown memory " + m);
    }
    for (const auto& [p, mems] : pf.assoc) {
        (void)mems;
        if (!pf.find_proc(p)) out.push_back("assoc references unknown proc " + p);
    }
    for (const Link& l : pf.links) {
        if (!pf.find_mem(l.a) || !pf.find_mem(l.b))
            out.push_back("link " + l.a + "--" + l.b + " references a non-memory");
        if (l.a == l.b) out.push_back("link " + l.a + " connects a memory to itself");
    }
    return out;
}

} // namespace hetmap
