#pragma once

#include <array>
#include <optional>
#include <string>

namespace toolplan {

/// The ten ordered workflow stages. The order is a fixed total order: a stage
/// can only be credited after every earlier stage has been met.
enum class StageId {
    TrainDataLoading = 0,
    TestDataLoading,
    CombineTrainTest,
    DataCleaning,
    FeatureEngineering,
    SplitTrainTest,
    TrainFeaturesTarget,
    TestFeatures,
    Modeling,
    CreateSubmission,
};

inline constexpr int kStageCount = 10;

inline constexpr std::array<StageId, kStageCount> kAllStages = {
    StageId::TrainDataLoading,  StageId::TestDataLoading,   StageId::CombineTrainTest,
    StageId::DataCleaning,      StageId::FeatureEngineering, StageId::SplitTrainTest,
    StageId::TrainFeaturesTarget, StageId::TestFeatures,    StageId::Modeling,
    StageId::CreateSubmission,
};

/// Wire names, used in the tool-catalog config, CLI flags and prompts.
inline const char* stage_name(StageId s) {
    switch (s) {
        case StageId::TrainDataLoading: return "train_data_loading";
        case StageId::TestDataLoading: return "test_data_loading";
        case StageId::CombineTrainTest: return "combine_train_test";
        case StageId::DataCleaning: return "data_cleaning";
        case StageId::FeatureEngineering: return "feature_engineering";
        case StageId::SplitTrainTest: return "split_train_test";
        case StageId::TrainFeaturesTarget: return "train_data_to_features_target";
        case StageId::TestFeatures: return "test_data_to_features";
        case StageId::Modeling: return "modeling";
        case StageId::CreateSubmission: return "create_submission_dataframe";
    }
    return "?";
}

inline std::optional<StageId> stage_from_name(const std::string& s) {
    for (StageId st : kAllStages)
        if (s == stage_name(st)) return st;
    return std::nullopt;
}

/// Subtask prompt prefixes attached to the proposer system prompt during
/// hierarchical search.
inline const char* stage_prompt_prefix(StageId s) {
    switch (s) {
        case StageId::TrainDataLoading:
            return "You are a Data Scientist in the Data Loading stage of solving a Kaggle "
                   "challenge, using only the tools available to you. This stage ends when you "
                   "have loaded the train data successfully.";
        case StageId::TestDataLoading:
            return "You are a Data Scientist in the Data Loading stage of solving a Kaggle "
                   "challenge, using only the tools available to you. This stage ends when you "
                   "have loaded the test data successfully.";
        case StageId::CombineTrainTest:
            return "You are a Data Scientist in the Data Loading stage of solving a Kaggle "
                   "challenge, using only the tools available to you. This stage ends when you "
                   "have combined the train and test data into a single dataframe successfully, "
                   "to be used for downstream Data Cleaning and Feature Engineering.";
        case StageId::DataCleaning:
            return "You are a Data Scientist in the Data Cleaning stage of solving a Kaggle "
                   "challenge, using only the tools available to you. This stage ends when there "
                   "are no missing values present in the data. This also includes the column "
                   "corresponding to the target variable, that may have NaNs in the test "
                   "partition since the target variable is not present in the test partition. "
                   "You are allowed to be innovative in filling the missing values based on your "
                   "understanding of the data.";
        case StageId::FeatureEngineering:
            return "You are a Data Scientist in the Feature Engineering stage of solving a "
                   "Kaggle challenge, using only the tools available to you. Create new "
                   "features, or delete unimportant features or transform existing features as "
                   "needed. You are not allowed to delete or modify features that indicate if "
                   "the row in the data belongs to the train or test partition. You are also "
                   "not allowed to augment the feature corresponding to the target variable. "
                   "Use your understanding of the data to aid your decisions. This stage ends "
                   "when the models feel that the features are good enough for modeling, and "
                   "categorical and numerical features have been properly encoded. After the "
                   "end of this stage, all the features should be (i) either int or float or "
                   "(ii) int, float, category with the number of unique values in the category "
                   "columns not being exorbitantly large.";
        case StageId::SplitTrainTest:
            return "You are a Data Scientist in the Split Train Test stage of solving a Kaggle "
                   "challenge, using only the tools available to you. Split the combined train "
                   "and test data into train and test dataframes. This stage ends when the "
                   "train and test dataframes are successfully split from the combined "
                   "dataframe.";
        case StageId::TrainFeaturesTarget:
            return "You are a Data Scientist in the Converting the Train Data to Features and "
                   "Target stage of solving a Kaggle challenge, using only the tools available "
                   "to you. Convert the train data into features and target. This stage ends "
                   "when the train data is successfully converted into features and target, for "
                   "making downstream modeling upon.";
        case StageId::TestFeatures:
            return "You are a Data Scientist in the Converting the Test Data to Features stage "
                   "of solving a Kaggle challenge, using only the tools available to you. "
                   "Convert the test data into features. This stage ends when the test data is "
                   "successfully converted into features, for making downstream predictions "
                   "upon.";
        case StageId::Modeling:
            return "You are a Data Scientist in the Modeling stage of solving a Kaggle "
                   "challenge, using only the tools available to you. Train and tune models. "
                   "You might need to experiment with different model choices and properly tune "
                   "your hyperparameters to get good performance. Use the provided evaluation "
                   "tools to evaluate your trained models if needed. This stage ends when the "
                   "agent has successfully created a model that it considers to be the best.";
        case StageId::CreateSubmission:
            return "You are a Data Scientist in the Create Submission stage of solving a Kaggle "
                   "challenge, using only the tools available to you. Make predictions on the "
                   "test data, and create a submission dataframe that contains the predictions "
                   "in the requested format. This stage ends when the submission dataframe in "
                   "the correct format is created.";
    }
    return "";
}

}  // namespace toolplan
