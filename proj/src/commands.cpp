namespace lmce { namespace { [[maybe_unused]] int placeholder_commands = 0; } }
