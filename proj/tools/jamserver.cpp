// Accompaniment server speaking the framed key-value wire protocol over TCP.
#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "jam/service.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Jam accompaniment server"};
    std::string config_path, listen, models;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "Config file (listen, seed, models)");
    auto* listen_opt = app.add_option("--listen", listen, "host:port (default 127.0.0.1:7070)");
    auto* seed_opt = app.add_option("--seed", seed, "Seed for requests that carry none");
    auto* models_opt = app.add_option("--models", models, "Comma-separated agent ids");
    CLI11_PARSE(app, argc, argv);

    try {
        jam::ServiceConfig config;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw std::runtime_error("cannot open " + config_path);
            std::ostringstream ss;
            ss << in.rdbuf();
            jam::load_service_config(ss.str(), config);
        }
        // Flags override the file.
        std::string overrides;
        if (*listen_opt) overrides += "listen = " + listen + "\n";
        if (*seed_opt) overrides += "seed = " + std::to_string(seed) + "\n";
        if (*models_opt) overrides += "models = " + models + "\n";
        jam::load_service_config(overrides, config);

        sigset_t signals;
        sigemptyset(&signals);
        sigaddset(&signals, SIGINT);
        sigaddset(&signals, SIGTERM);
        pthread_sigmask(SIG_BLOCK, &signals, nullptr);

        jam::JamService service(config);
        service.start();
        std::cerr << "jamserver listening on " << config.host << ":" << service.port() << " models=";
        for (std::size_t i = 0; i < config.models.size(); ++i) std::cerr << (i ? "," : "") << config.models[i];
        std::cerr << std::endl;

        int received = 0;
        sigwait(&signals, &received);
        service.stop();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "jamserver: " << e.what() << "\n";
        return 1;
    }
}
