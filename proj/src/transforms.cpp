namespace lmce { namespace { [[maybe_unused]] int placeholder_transforms = 0; } }
