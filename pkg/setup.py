from setuptools import setup, find_packages

try:
    with open("requirements.txt") as f:
        requirements = f.read().splitlines()
except FileNotFoundError:
    requirements = []

setup(
    name="ham_training",
    version="0.1",
    packages=find_packages(),
    package_data={"src.experiment.presets": ["*.yaml"]},
    install_requires=requirements,
    entry_points={"console_scripts": ["ham = src.experiment.cli:app"]},
)
