"""Pool block-withholding games with betrayal."""
