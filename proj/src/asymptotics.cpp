namespace lmce { namespace { [[maybe_unused]] int placeholder_asymptotics = 0; } }
