from setuptools import setup, find_packages

setup(
    name="classrbm",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    package_data={"classrbm.data": ["*.yaml"]},
    install_requires=[
        "numpy",
        "scipy",
        "pandas",
        "pydantic>=2",
        "python-dotenv",
        "PyYAML",
        "scikit-learn>=1.2",
    ],
    extras_require={
        "test": ["pytest", "pytest-cov", "hypothesis"],
    },
    entry_points={
        "console_scripts": ["classrbm=classrbm.cli:main"],
    },
    author="Your Name",
    author_email="your.email@example.com",
    description="Classification RBM with Dropping: exact prediction, relevant-input discovery and experiment grids",
    keywords="machine learning, restricted boltzmann machine, dropout, classification",
    python_requires=">=3.8",
)
