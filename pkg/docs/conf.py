"""Sphinx configuration for the equityindex documentation."""
import os
import sys

sys.path.append(os.path.dirname(os.path.dirname(__file__)))
from equityindex._version import __version__  # isort:skip # needs sys.path above

# project
project = "equityindex"
author = "equityindex developers"
copyright = "2024, equityindex developers"
version = release = __version__

# sources
master_doc = "index"
source_suffix = ".rst"
exclude_patterns = ["build"]
templates_path = ["templates"]
language = "en"
needs_sphinx = "1.8"
pygments_style = "sphinx"

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.coverage",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
    "sphinx.ext.napoleon",
    # after napoleon
    "sphinx_autodoc_typehints",
]

# type aliases sphinx_autodoc_typehints cannot resolve
nitpick_ignore = [
    ("py:class", name)
    for name in (
        "Callable",
        "Optional",
        "Sequence",
        "Union",
        "np.ndarray",
        "pd.DataFrame",
        "typing.Tuple",
        "typing.Union",
    )
]


def _document_init(app, what, name, obj, skip, options):
    # the constructors carry the parameter docs of ScoreSet and the scenarios
    return False if name == "__init__" else skip


def setup(app):
    app.connect("autodoc-skip-member", _document_init)


# output
html_theme = "sphinx_rtd_theme"
html_context = {"display_github": False, "conf_py_path": "/docs/"}
htmlhelp_basename = "equityindexdoc"
latex_elements = {}
latex_documents = [
    (master_doc, "equityindex.tex", "equityindex Documentation", author, "manual")
]
man_pages = [(master_doc, "equityindex", "equityindex Documentation", [author], 1)]

# extensions
autodoc_default_options = {
    "members": None,
    "inherited-members": None,
    "show-inheritance": None,
    "undoc-members": None,
}
coverage_write_headline = False
intersphinx_mapping = {
    "numpy": ("https://numpy.org/doc/stable", None),
    "pandas": ("https://pandas.pydata.org/pandas-docs/stable", None),
    "python": ("https://docs.python.org/3", None),
    "scipy": ("https://docs.scipy.org/doc/scipy", None),
}
napoleon_google_docstring = False
napoleon_numpy_docstring = True
set_type_checking_flag = True
