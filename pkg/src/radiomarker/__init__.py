"""CT radiomics features and SMOTE/PCA/SVM outcome models under nested LOOCV."""

__version__ = "0.1.0"
