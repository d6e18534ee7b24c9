"""Reference implementations used only to cross-check production code."""
